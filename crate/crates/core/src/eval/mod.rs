//! Automatic metrics: perplexity, vocabulary, utterance length, success rate,
//! the cross study, act distributions and correlation.

mod cross;
mod lm;
mod metrics;
mod report;

pub use cross::{cross_study, CrossConfig, CrossMatrix};
pub use lm::{TrigramLm, ADD_K, BOS, EOS, UNK};
pub use metrics::{
    act_histogram, pearson, sample_user_utterances, simulate_corpus, trigram_ppl, vocab_and_len, ActHistogram,
};
pub use report::{
    config_hash, curve_svg, hist_svg, measure, report_for, test_utterances, CrossFile, MetricReport, MetricsConfig,
    MetricsFile,
};
pub use crate::rl::success_rate;
