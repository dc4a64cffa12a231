//! The act-free simulator: answers with the corpus user turn whose context is
//! closest to the current one.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::supervised::SlState;
use super::{SimKind, UserSimulator, UserTurn};
use crate::corpus::{Annotator, Gazetteer};
use crate::domain::{Goal, Slot, SlotMap, SystemAct, UserActKind, MAX_TURNS};
use crate::error::{Error, Result};
use crate::nlg::{lexicalize, TfIdfIndex};
use crate::SimRng;

/// Values the goal can put into a retrieved utterance right now.
pub fn goal_values(goal: &Goal, relaxed: bool, after_failure: bool) -> SlotMap {
    let mut values = if relaxed {
        goal.relaxed_constraints()
    } else {
        goal.constraints.clone()
    };
    for s in Slot::BOOKING {
        if let Some(v) = goal.booking_value(s, after_failure) {
            values.insert(s, v);
        }
    }
    values
}

/// Best-matching stored user turn for `context`, restricted to turns whose
/// placeholders `values` can fill, lexicalized with those values.
pub fn sle_respond<S: AsRef<str>>(context: &[S], values: &SlotMap, index: &TfIdfIndex) -> Result<String> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let fillable: BTreeSet<&str> = values.keys().map(|s| s.as_str()).collect();
    let (c, _) = index
        .best(context, |c| c.fits(&fillable))
        .ok_or_else(|| Error::NoCandidate("no stored turn fits the goal".into()))?;
    lexicalize(&c.utterance, values, None)
}

#[derive(Debug, Clone)]
pub struct SleSimulator {
    index: Arc<TfIdfIndex>,
    gazetteer: Arc<Gazetteer>,
    annotator: Arc<Annotator>,
    goal: Option<Goal>,
    state: SlState,
    last_utterance: String,
}

impl SleSimulator {
    pub fn new(index: Arc<TfIdfIndex>, gazetteer: Arc<Gazetteer>, annotator: Arc<Annotator>) -> Self {
        SleSimulator {
            index,
            gazetteer,
            annotator,
            goal: None,
            state: SlState::default(),
            last_utterance: String::new(),
        }
    }
}

impl UserSimulator for SleSimulator {
    fn kind(&self) -> SimKind {
        SimKind::SlE
    }

    fn reset(&mut self, goal: &Goal, _rng: &mut SimRng) {
        self.goal = Some(goal.clone());
        self.state = SlState::default();
        self.last_utterance.clear();
    }

    fn respond(&mut self, system: Option<(&SystemAct, &str)>, _rng: &mut SimRng) -> Result<UserTurn> {
        let goal = self.goal.as_ref().ok_or_else(|| Error::InvalidGoal("simulator not reset".into()))?;
        if let Some((act, _)) = system {
            self.state.observe(act);
        }
        let relaxed = self.state.no_match_seen;
        let after_failure = self.state.booking_failed || self.state.after_failure;
        self.state.after_failure = after_failure;
        let mut context = Vec::new();
        if let Some((_, text)) = system {
            context.extend(self.gazetteer.delexicalize_text(text));
        }
        context.extend(self.gazetteer.delexicalize_text(&self.last_utterance));
        let utterance = sle_respond(&context, &goal_values(goal, relaxed, after_failure), &self.index)?;
        self.state.turn += 1;
        self.last_utterance = utterance.clone();
        let closing = self.annotator.annotate(&utterance).act.kind == UserActKind::Goodbye;
        Ok(UserTurn {
            utterance,
            act: None,
            done: closing || self.state.turn >= MAX_TURNS as usize,
        })
    }
}
