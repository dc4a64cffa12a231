//! Corpus ingestion: loading, regex act annotation, delexicalization, the
//! restaurant database and the balanced goal database.

mod annotate;
mod db;
mod gazetteer;
mod goals;
mod multiwoz;
pub mod synth;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use annotate::{default_rules, AnnotationReport, AnnotationRule, Annotation, Annotator};
pub use db::{booking_available, Ontology, RestaurantDb};
pub use gazetteer::{Gazetteer, Span};
pub use goals::{
    balance, build_goal_db, normalize_goal, resample_booking, sample_goal, shares, subtask_counts, GoalDb,
    SubtaskShares,
};
pub use multiwoz::{convert_goal, load_corpus, map_system_acts, parse_corpus, RawDialog, RawDomainGoal, RawGoal, RawTurn};

use crate::domain::{read_transcripts, write_transcripts, Dialog};
use crate::error::Result;

/// An annotated corpus together with the databases derived from it.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub dialogs: Vec<Dialog>,
    pub db: RestaurantDb,
    pub ontology: Ontology,
    pub goals: GoalDb,
    pub report: AnnotationReport,
}

impl Corpus {
    /// Annotates `dialogs` and derives the goal database.
    pub fn from_dialogs(mut dialogs: Vec<Dialog>, db: RestaurantDb, ontology: Ontology, seed: u64) -> Result<Self> {
        let annotator = Annotator::with_default_rules(Gazetteer::new(&db, &ontology));
        let report = annotator.annotate_dialogs(&mut dialogs);
        let goals = build_goal_db(&dialogs, &db, &mut ChaCha8Rng::seed_from_u64(seed))?;
        Ok(Corpus {
            dialogs,
            db,
            ontology,
            goals,
            report,
        })
    }

    /// The bundled database plus a synthesized corpus, built in memory.
    pub fn synthetic(config: &synth::SynthConfig) -> Result<Self> {
        let db = RestaurantDb::bundled();
        let ontology = Ontology::bundled();
        let raw = synth::synthesize(&db, &ontology, config);
        let dialogs = parse_corpus(&serde_json::to_string(&raw)?)?;
        Corpus::from_dialogs(dialogs, db, ontology, config.seed)
    }

    pub fn gazetteer(&self) -> Gazetteer {
        Gazetteer::new(&self.db, &self.ontology)
    }

    pub fn annotator(&self) -> Annotator {
        Annotator::with_default_rules(self.gazetteer())
    }

    /// Writes the ingest artifacts into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut annotated = Vec::new();
        write_transcripts(&mut annotated, &self.dialogs)?;
        fs::write(dir.join("annotated.jsonl"), annotated)?;
        fs::write(dir.join("goals.json"), serde_json::to_string_pretty(&self.goals)? + "\n")?;
        fs::write(dir.join("restaurants.json"), serde_json::to_string_pretty(self.db.all())? + "\n")?;
        fs::write(
            dir.join("annotation_report.json"),
            serde_json::to_string_pretty(&self.report)? + "\n",
        )?;
        Ok(())
    }

    /// Reads back what [`Corpus::save`] wrote.
    pub fn load(dir: &Path) -> Result<Self> {
        let dialogs = read_transcripts(std::io::BufReader::new(fs::File::open(dir.join("annotated.jsonl"))?))?;
        let goals: GoalDb = serde_json::from_str(&fs::read_to_string(dir.join("goals.json"))?)?;
        let report: AnnotationReport = serde_json::from_str(&fs::read_to_string(dir.join("annotation_report.json"))?)?;
        let db = RestaurantDb::new(serde_json::from_str(&fs::read_to_string(dir.join("restaurants.json"))?)?)?;
        Ok(Corpus {
            dialogs,
            db,
            ontology: Ontology::bundled(),
            goals,
            report,
        })
    }
}

/// Summary returned by [`ingest`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub dialogs: usize,
    pub goals: usize,
    pub match_rate: f64,
}

/// Loads a corpus file, annotates it and writes the artifacts to `out`.
///
/// The restaurant database is read from `restaurant_db.json` next to the input
/// when present, else the bundled one is used.
pub fn ingest(input: &Path, out: &Path, seed: u64) -> Result<IngestSummary> {
    let dialogs = load_corpus(input)?;
    let db_path = input.parent().map(|p| p.join("restaurant_db.json"));
    let db = RestaurantDb::load_or_bundled(db_path.as_deref())?;
    let corpus = Corpus::from_dialogs(dialogs, db, Ontology::bundled(), seed)?;
    corpus.save(out)?;
    Ok(IngestSummary {
        dialogs: corpus.dialogs.len(),
        goals: corpus.goals.len(),
        match_rate: corpus.report.match_rate,
    })
}
