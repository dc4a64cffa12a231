//! Multinomial logistic next-act model for the supervised user simulators.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::belief::belief_update;
use crate::domain::{
    BeliefSpan, Dialog, Goal, Slot, SlotCategory, Speaker, SystemAct, SystemActKind, UserAct, UserActKind,
};
use crate::error::{Error, Result};

const SYSTEM_BASE: usize = 1;
const PREV_USER_BASE: usize = SYSTEM_BASE + 7 + 2;
const FLAG_BASE: usize = PREV_USER_BASE + 8;
const FLAGS: [&str; 9] = [
    "goal_booking",
    "goal_requests",
    "goal_relaxation",
    "offered",
    "requests_left",
    "requests_open",
    "booked",
    "booking_failed",
    "constraints_told",
];
const TURN_BASE: usize = FLAG_BASE + FLAGS.len();
pub const FEATURES: usize = TURN_BASE + 4;

/// What the user side knows when choosing its next act.
#[derive(Debug, Clone, Copy)]
pub struct ActContext<'a> {
    pub goal: &'a Goal,
    pub belief: &'a BeliefSpan,
    pub system: Option<&'a SystemAct>,
    pub prev_user: Option<UserActKind>,
    /// Informable slots the user has already given.
    pub informed: &'a BTreeSet<Slot>,
    /// Zero-based index of the user turn being chosen.
    pub turn: usize,
    pub booking_failed: bool,
}

pub fn feature_names() -> Vec<String> {
    let mut names = vec!["bias".to_string()];
    names.extend(SystemActKind::ALL.iter().map(|k| format!("sys={k}")));
    names.push("sys=none".into());
    names.push("sys_no_match".into());
    names.push("sys_booking_failed".into());
    names.extend(UserActKind::ALL.iter().map(|k| format!("prev={k}")));
    names.push("prev=none".into());
    names.extend(FLAGS.iter().map(|f| f.to_string()));
    names.extend(["turn=0", "turn=1-2", "turn=3-5", "turn=6+"].map(String::from));
    names
}

/// Binary feature vector for one decision.
pub fn features(ctx: &ActContext) -> Vec<f64> {
    let mut x = vec![0.0; FEATURES];
    x[0] = 1.0;
    match ctx.system {
        Some(s) => {
            x[SYSTEM_BASE + s.kind.index()] = 1.0;
            if s.kind == SystemActKind::PresentResult && s.get(Slot::Name).is_none() {
                x[SYSTEM_BASE + 7] = 1.0;
            }
            if s.kind == SystemActKind::InformReservationResult && s.get(Slot::Reference).is_none() {
                x[SYSTEM_BASE + 8] = 1.0;
            }
        }
        None => x[SYSTEM_BASE + 6] = 1.0,
    }
    match ctx.prev_user {
        Some(k) => x[PREV_USER_BASE + k.index()] = 1.0,
        None => x[PREV_USER_BASE + 7] = 1.0,
    }
    let g = ctx.goal;
    let b = ctx.belief;
    let requests_left = g.requestables.iter().any(|s| !b.inform.contains_key(s));
    let flags = [
        g.booking.is_some(),
        !g.requestables.is_empty(),
        !g.relaxations.is_empty(),
        b.inform.contains_key(&Slot::Name),
        requests_left,
        !b.request.is_empty(),
        b.inform.contains_key(&Slot::Reference),
        ctx.booking_failed,
        g.constraints.keys().all(|s| ctx.informed.contains(s)),
    ];
    for (i, f) in flags.into_iter().enumerate() {
        x[FLAG_BASE + i] = f as u8 as f64;
    }
    let bucket = match ctx.turn {
        0 => 0,
        1..=2 => 1,
        3..=5 => 2,
        _ => 3,
    };
    x[TURN_BASE + bucket] = 1.0;
    x
}

/// One labelled decision per annotated user turn, replaying each dialog's belief span.
pub fn corpus_examples(dialogs: &[Dialog]) -> Vec<(Vec<f64>, UserActKind)> {
    let mut out = Vec::new();
    for d in dialogs {
        let mut belief = BeliefSpan::default();
        let mut informed = BTreeSet::new();
        let mut prev_user: Option<UserAct> = None;
        let mut system: Option<SystemAct> = None;
        let mut failed = false;
        let mut user_turn = 0;
        for t in &d.turns {
            match t.speaker {
                Speaker::User => {
                    let Some(act) = t.user_act() else { continue };
                    let ctx = ActContext {
                        goal: &d.goal,
                        belief: &belief,
                        system: system.as_ref(),
                        prev_user: prev_user.as_ref().map(|a| a.kind),
                        informed: &informed,
                        turn: user_turn,
                        booking_failed: failed,
                    };
                    out.push((features(&ctx), act.kind));
                    informed.extend(act.slots().keys().filter(|s| s.category() == SlotCategory::Informable));
                    prev_user = Some(act.clone());
                    user_turn += 1;
                }
                Speaker::System => {
                    system = t.system_act().cloned();
                    if let Some(s) = &system {
                        belief = belief_update(&belief, prev_user.as_ref(), s);
                        if s.kind == SystemActKind::InformReservationResult {
                            failed = s.get(Slot::Reference).is_none();
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlTrainConfig {
    pub epochs: usize,
    pub step: f64,
}

impl Default for SlTrainConfig {
    fn default() -> Self {
        SlTrainConfig { epochs: 400, step: 1.0 }
    }
}

/// Linear scores per user act kind, softmax-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActModel {
    pub feature_names: Vec<String>,
    /// One row of weights per [`UserActKind`], in declaration order.
    pub weights: Vec<Vec<f64>>,
}

impl ActModel {
    pub fn zeros(features: usize) -> Self {
        ActModel {
            feature_names: if features == FEATURES { feature_names() } else { Vec::new() },
            weights: vec![vec![0.0; features]; UserActKind::ALL.len()],
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn distribution(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.scores(x))
    }

    /// Mean cross-entropy.
    pub fn loss(&self, data: &[(Vec<f64>, UserActKind)]) -> f64 {
        let total: f64 = data
            .iter()
            .map(|(x, y)| -self.distribution(x)[y.index()].max(f64::MIN_POSITIVE).ln())
            .sum();
        total / data.len().max(1) as f64
    }

    pub fn accuracy(&self, data: &[(Vec<f64>, UserActKind)]) -> f64 {
        let hits = data
            .iter()
            .filter(|(x, y)| argmax(&self.distribution(x)) == y.index())
            .count();
        hits as f64 / data.len().max(1) as f64
    }
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Full-batch gradient descent on mean cross-entropy. Returns the model and the
/// loss before each epoch plus the final loss.
pub fn sl_train(data: &[(Vec<f64>, UserActKind)], config: SlTrainConfig) -> Result<(ActModel, Vec<f64>)> {
    if data.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "supervised training needs at least 100 user turns, got {}",
            data.len()
        )));
    }
    let classes: BTreeSet<UserActKind> = data.iter().map(|(_, y)| *y).collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateCorpus(format!("only one user act present: {classes:?}")));
    }
    let dim = data[0].0.len();
    let mut model = ActModel::zeros(dim);
    let n = data.len() as f64;
    let mut losses = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        losses.push(model.loss(data));
        let mut grad = vec![vec![0.0; dim]; UserActKind::ALL.len()];
        for (x, y) in data {
            let p = model.distribution(x);
            for (k, row) in grad.iter_mut().enumerate() {
                let r = p[k] - if k == y.index() { 1.0 } else { 0.0 };
                if r == 0.0 {
                    continue;
                }
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += r * xi;
                }
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= config.step * gi / n;
            }
        }
    }
    losses.push(model.loss(data));
    Ok((model, losses))
}
