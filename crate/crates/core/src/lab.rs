//! One handle on a corpus and everything trained from it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{synth::SynthConfig, Corpus};
use crate::dialog_system::SystemCore;
use crate::domain::Goal;
use crate::error::{Error, Result};
use crate::eval::{cross_study, measure, test_utterances, CrossConfig, CrossMatrix, MetricsConfig, MetricsFile};
use crate::nlg::TemplateBank;
use crate::rl::{train, Featurizer, RlAgent, SavedPolicy, TrainConfig, TrainOutcome};
use crate::simulator::{SimKind, SimResources, UserSimulator};

/// Minimum corpus count for a word to get a slot in the RL state.
pub const FEATURE_MIN_COUNT: usize = 2;

#[derive(Debug, Clone)]
pub struct Lab {
    pub corpus: Corpus,
    pub resources: SimResources,
    pub core: SystemCore,
}

impl Lab {
    /// Trains the simulator resources on `corpus`.
    pub fn new(corpus: Corpus) -> Result<Self> {
        let resources = SimResources::from_corpus(&corpus)?;
        let core = SystemCore::new(corpus.db.clone(), &corpus.ontology, TemplateBank::bundled_system());
        Ok(Lab {
            corpus,
            resources,
            core,
        })
    }

    /// The built-in synthetic corpus.
    pub fn synthetic() -> Result<Self> {
        Lab::new(Corpus::synthetic(&SynthConfig::default())?)
    }

    /// Artifacts written by `corpus ingest` when `dir` is given, else the synthetic corpus.
    pub fn open(dir: Option<&Path>) -> Result<Self> {
        match dir {
            Some(d) => Lab::new(Corpus::load(d)?),
            None => Lab::synthetic(),
        }
    }

    pub fn with_nlu_noise(mut self, noise: f64) -> Self {
        self.core = self.core.with_nlu_noise(noise);
        self
    }

    pub fn goals(&self) -> &[Goal] {
        &self.corpus.goals.goals
    }

    pub fn simulator(&self, kind: SimKind) -> Box<dyn UserSimulator> {
        self.resources.build(kind)
    }

    pub fn featurizer(&self) -> Featurizer {
        Featurizer::from_dialogs(&self.corpus.dialogs, FEATURE_MIN_COUNT)
    }

    /// Trains a system against `kind`.
    pub fn train(&self, kind: SimKind, config: &TrainConfig) -> Result<TrainOutcome> {
        train(self.simulator(kind).as_mut(), &self.core, self.goals(), self.featurizer(), config)
    }

    /// Automatic metrics of each simulator in `kinds`.
    pub fn metrics(&self, kinds: &[SimKind], config: &MetricsConfig) -> Result<MetricsFile> {
        let test = test_utterances(&self.corpus, config);
        let reports = kinds
            .iter()
            .map(|k| measure(*k, &self.resources, &self.core, &self.corpus, &test, config).map(|(r, _)| r))
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricsFile::new(*config, reports))
    }

    pub fn cross(&self, policies: &BTreeMap<SimKind, RlAgent>, config: &CrossConfig) -> Result<CrossMatrix> {
        cross_study(&self.resources, &self.core, self.goals(), policies, config)
    }
}

/// Where `train --out <dir>` puts the system trained against `kind`.
pub fn policy_path(dir: &Path, kind: SimKind) -> PathBuf {
    dir.join(kind.as_str()).join("policy.json")
}

/// Every `<dir>/<kind>/policy.json` present. Files that exist but do not parse are errors.
pub fn load_policies(dir: &Path) -> Result<BTreeMap<SimKind, SavedPolicy>> {
    if !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("policies directory {} not found", dir.display()),
        )));
    }
    let mut out = BTreeMap::new();
    for kind in SimKind::ALL {
        let path = policy_path(dir, kind);
        if fs::metadata(&path).is_ok() {
            out.insert(kind, SavedPolicy::load(&path)?);
        }
    }
    Ok(out)
}
