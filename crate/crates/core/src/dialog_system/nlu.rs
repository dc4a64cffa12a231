use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Annotator;
use crate::domain::{SlotMap, UserAct, UserActKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluResult {
    pub act: UserAct,
    /// 1 when a rule matched, 0 for the fallback act.
    pub confidence: f64,
    /// Every value spotted in the utterance.
    #[serde(default)]
    pub mentioned: SlotMap,
}

/// Pattern-based understanding, with optional random act flips.
#[derive(Debug, Clone)]
pub struct Nlu {
    annotator: Annotator,
    pub noise: f64,
}

impl Nlu {
    pub fn new(annotator: Annotator) -> Self {
        Nlu { annotator, noise: 0.0 }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise.clamp(0.0, 1.0);
        self
    }

    pub fn annotator(&self) -> &Annotator {
        &self.annotator
    }

    pub fn parse(&self, utterance: &str) -> NluResult {
        let a = self.annotator.annotate(utterance);
        NluResult {
            act: a.act,
            confidence: if a.matched { 1.0 } else { 0.0 },
            mentioned: a.mentioned,
        }
    }

    /// Like [`Nlu::parse`], but with probability `noise` the act kind is replaced
    /// by a different one drawn uniformly. No randomness is drawn at zero noise.
    pub fn parse_noisy<R: Rng>(&self, utterance: &str, rng: &mut R) -> NluResult {
        let mut r = self.parse(utterance);
        if self.noise > 0.0 && rng.gen::<f64>() < self.noise {
            let others: Vec<UserActKind> = UserActKind::ALL.into_iter().filter(|k| *k != r.act.kind).collect();
            let kind = *others.choose(rng).expect("seven act kinds");
            r.act = UserAct::filtered(kind, &r.mentioned);
            r.confidence = 0.0;
        }
        r
    }
}
