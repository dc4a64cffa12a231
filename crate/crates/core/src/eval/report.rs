//! Metric reports, their on-disk formats and static plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cross::CrossMatrix;
use super::lm::ADD_K;
use super::metrics::{act_histogram, sample_user_utterances, simulate_corpus, trigram_ppl, vocab_and_len, ActHistogram};
use crate::corpus::{Annotator, Corpus};
use crate::dialog_system::SystemCore;
use crate::domain::{Dialog, UserActKind};
use crate::error::Result;
use crate::rl::Checkpoint;
use crate::simulator::{SimKind, SimResources};
use crate::derive_seed;

/// Short hex digest of a config's JSON form.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configs serialize");
    Sha256::digest(&json)[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Simulated dialogs per simulator.
    pub dialogs: usize,
    /// Corpus user utterances the language models are scored on.
    pub test_utterances: usize,
    pub add_k: f64,
    /// Training words rarer than this count as `<unk>`.
    pub min_count: usize,
    pub seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            dialogs: 200,
            test_utterances: 5000,
            add_k: ADD_K,
            min_count: 1,
            seed: 0,
        }
    }
}

impl MetricsConfig {
    pub fn simulation_seed(&self, kind: SimKind) -> u64 {
        derive_seed(self.seed, &format!("simulate/{kind}"))
    }

    pub fn test_seed(&self) -> u64 {
        derive_seed(self.seed, "ppl-test")
    }
}

/// Automatic metrics of one simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub simulator: SimKind,
    pub ppl: f64,
    pub vocab: usize,
    pub avg_utt_len: f64,
    pub dialogs: usize,
    pub success: f64,
    pub act_hist: ActHistogram,
}

/// Simulates `config.dialogs` dialogs against the rule system and measures them.
pub fn measure(
    kind: SimKind,
    resources: &SimResources,
    core: &SystemCore,
    corpus: &Corpus,
    test: &[String],
    config: &MetricsConfig,
) -> Result<(MetricReport, Vec<Dialog>)> {
    let mut sim = resources.build(kind);
    let dialogs = simulate_corpus(sim.as_mut(), core, &corpus.goals.goals, config.dialogs, config.simulation_seed(kind))?;
    let report = report_for(kind, &dialogs, test, &resources.annotator, config)?;
    Ok((report, dialogs))
}

pub fn report_for(
    kind: SimKind,
    dialogs: &[Dialog],
    test: &[String],
    annotator: &Annotator,
    config: &MetricsConfig,
) -> Result<MetricReport> {
    let (vocab, avg_utt_len) = vocab_and_len(dialogs);
    let success = dialogs
        .iter()
        .filter(|d| d.outcome == crate::domain::Outcome::Success)
        .count() as f64
        / dialogs.len().max(1) as f64;
    Ok(MetricReport {
        simulator: kind,
        ppl: trigram_ppl(dialogs, test, config.add_k, config.min_count)?,
        vocab,
        avg_utt_len,
        dialogs: dialogs.len(),
        success,
        act_hist: act_histogram(dialogs, annotator),
    })
}

/// The corpus utterances every simulator's language model is scored on.
pub fn test_utterances(corpus: &Corpus, config: &MetricsConfig) -> Vec<String> {
    sample_user_utterances(&corpus.dialogs, config.test_utterances, config.test_seed())
}

/// Everything `metrics.json` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub seed: u64,
    pub config_hash: String,
    pub config: MetricsConfig,
    pub reports: Vec<MetricReport>,
}

impl MetricsFile {
    pub fn new(config: MetricsConfig, reports: Vec<MetricReport>) -> Self {
        MetricsFile {
            seed: config.seed,
            config_hash: config_hash(&config),
            config,
            reports,
        }
    }

    /// Writes `metrics.json` and `act_hist.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(self)? + "\n")?;
        let mut w = csv::Writer::from_path(dir.join("act_hist.csv"))?;
        w.write_record(["simulator", "act", "frequency"])?;
        for r in &self.reports {
            for (act, f) in &r.act_hist {
                w.write_record([r.simulator.to_string(), act.to_string(), format!("{f:.6}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything `cross_matrix.json` holds; the CSV has the bare grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossFile {
    pub seed: u64,
    pub config_hash: String,
    pub matrix: CrossMatrix,
}

impl CrossFile {
    pub fn new(matrix: CrossMatrix) -> Self {
        CrossFile {
            seed: matrix.config.seed,
            config_hash: config_hash(&matrix.config),
            matrix,
        }
    }

    /// Writes `cross_matrix.csv` and `cross_matrix.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.matrix.write_csv(fs::File::create(dir.join("cross_matrix.csv"))?)?;
        fs::write(dir.join("cross_matrix.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn svg_frame(title: &str, body: &str, legend: &[String]) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n\
         <line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = H - PAD - v * (H - 2.0 * PAD);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{v:.2}</text>", PAD - 4.0, y + 4.0);
    }
    s.push_str(body);
    for (i, name) in legend.iter().enumerate() {
        let y = PAD + 14.0 * i as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{:.1}\">{name}</text>",
            W - PAD - 90.0,
            y - 9.0,
            COLORS[i % COLORS.len()],
            W - PAD - 76.0,
            y
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Frozen-evaluation success against episodes, one line per run.
pub fn curve_svg(runs: &[(String, Vec<Checkpoint>)]) -> String {
    let max_ep = runs.iter().flat_map(|(_, c)| c.iter().map(|p| p.episode)).max().unwrap_or(1).max(1) as f64;
    let mut body = String::new();
    for (i, (_, curve)) in runs.iter().enumerate() {
        let points: Vec<String> = curve
            .iter()
            .map(|c| {
                let x = PAD + c.episode as f64 / max_ep * (W - 2.0 * PAD);
                let y = H - PAD - c.success * (H - 2.0 * PAD);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            body,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>",
            COLORS[i % COLORS.len()],
            points.join(" ")
        );
    }
    let _ = writeln!(
        body,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{max_ep} episodes</text>",
        W - PAD,
        H - PAD + 16.0
    );
    let names: Vec<String> = runs.iter().map(|(n, _)| n.clone()).collect();
    svg_frame("success rate", &body, &names)
}

/// Grouped bars of user act frequencies, one color per simulator.
pub fn hist_svg(hists: &[(String, ActHistogram)]) -> String {
    let acts = UserActKind::ALL;
    let group = (W - 2.0 * PAD) / acts.len() as f64;
    let bar = group * 0.8 / hists.len().max(1) as f64;
    let mut body = String::new();
    for (a, act) in acts.iter().enumerate() {
        let x0 = PAD + a as f64 * group + group * 0.1;
        for (i, (_, h)) in hists.iter().enumerate() {
            let v = h.get(act).copied().unwrap_or(0.0);
            let height = v * (H - 2.0 * PAD);
            let _ = writeln!(
                body,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{bar:.1}\" height=\"{height:.1}\" fill=\"{}\"/>",
                x0 + i as f64 * bar,
                H - PAD - height,
                COLORS[i % COLORS.len()]
            );
        }
        let _ = writeln!(
            body,
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">{act}</text>",
            x0 + group * 0.4,
            H - PAD + 14.0
        );
    }
    let names: Vec<String> = hists.iter().map(|(n, _)| n.clone()).collect();
    svg_frame("user act distribution", &body, &names)
}
