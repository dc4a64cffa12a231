//! Corpus-level metrics over simulated dialogs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::lm::TrigramLm;
use crate::corpus::Annotator;
use crate::dialog_system::{RulePolicy, SystemCore};
use crate::domain::{Dialog, Goal, UserActKind};
use crate::error::{Error, Result};
use crate::rl::{run_episode, EpisodeConfig};
use crate::simulator::UserSimulator;
use crate::seeded;

/// `n` dialogs between `sim` and the rule system on goals drawn uniformly from
/// `goals`. Any component failure rejects the whole corpus.
pub fn simulate_corpus(
    sim: &mut dyn UserSimulator,
    core: &SystemCore,
    goals: &[Goal],
    n: usize,
    seed: u64,
) -> Result<Vec<Dialog>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if goals.is_empty() {
        return Err(Error::EmptyGoalDb);
    }
    let mut rng = seeded(seed);
    let config = EpisodeConfig { close_on_success: true };
    let mut dialogs = Vec::with_capacity(n);
    for i in 0..n {
        let goal = &goals[rng.gen_range(0..goals.len())];
        let ep = run_episode(sim, core, &RulePolicy, goal, &mut rng, &config);
        if let Some(reason) = ep.aborted {
            return Err(Error::SimulationFailed { dialog: i, reason });
        }
        let mut dialog = ep.dialog;
        dialog.id = format!("{}-{i:04}", sim.kind());
        dialogs.push(dialog);
    }
    Ok(dialogs)
}

fn user_sentences(dialogs: &[Dialog]) -> Vec<Vec<&str>> {
    dialogs
        .iter()
        .flat_map(|d| d.user_turns())
        .map(|t| t.tokens().collect())
        .collect()
}

/// Up to `n` user utterances of `dialogs`, sampled without replacement.
pub fn sample_user_utterances(dialogs: &[Dialog], n: usize, seed: u64) -> Vec<String> {
    let mut all: Vec<String> = dialogs.iter().flat_map(|d| d.user_turns()).map(|t| t.utterance.clone()).collect();
    if all.len() > n {
        all.shuffle(&mut seeded(seed));
        all.truncate(n);
    }
    all
}

/// Perplexity on `test` of a trigram model trained on the user turns of `train`.
pub fn trigram_ppl(train: &[Dialog], test: &[String], k: f64, min_count: usize) -> Result<f64> {
    let lm = TrigramLm::train(&user_sentences(train), k, min_count)?;
    let test: Vec<Vec<&str>> = test.iter().map(|u| u.split_whitespace().collect()).collect();
    lm.perplexity(&test)
}

/// Distinct user-turn tokens and the mean user-turn length in tokens.
pub fn vocab_and_len(dialogs: &[Dialog]) -> (usize, f64) {
    let sentences = user_sentences(dialogs);
    let vocab: BTreeSet<&str> = sentences.iter().flatten().copied().collect();
    let tokens: usize = sentences.iter().map(Vec::len).sum();
    let len = if sentences.is_empty() {
        0.0
    } else {
        tokens as f64 / sentences.len() as f64
    };
    (vocab.len(), len)
}

pub type ActHistogram = BTreeMap<UserActKind, f64>;

/// Relative frequency of each user act kind over all user turns. Turns without
/// an act are labeled by `annotator`. All zeros when there are no user turns.
pub fn act_histogram(dialogs: &[Dialog], annotator: &Annotator) -> ActHistogram {
    let mut hist: ActHistogram = UserActKind::ALL.iter().map(|k| (*k, 0.0)).collect();
    let mut n = 0usize;
    for t in dialogs.iter().flat_map(|d| d.user_turns()) {
        let kind = match t.user_act() {
            Some(a) => a.kind,
            None => annotator.annotate(&t.utterance).act.kind,
        };
        *hist.get_mut(&kind).expect("every kind present") += 1.0;
        n += 1;
    }
    if n > 0 {
        hist.values_mut().for_each(|v| *v /= n as f64);
    }
    hist
}

/// Sample correlation and its two-sided p-value under a t distribution with
/// `n - 2` degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!("lengths differ ({} vs {})", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok((r, p))
}
