//! The learner's view of a dialog: tracked-state flags followed by word counts
//! of the latest user message.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Dialog, DialogState, Slot};
use crate::text::tokenize;

const TURN_BUCKETS: [&str; 4] = ["turn=0-2", "turn=3-5", "turn=6-8", "turn=9+"];

pub fn state_feature_names() -> Vec<String> {
    let mut names = vec!["bias".to_string()];
    names.extend(Slot::INFORMABLE.iter().map(|s| format!("filled:{s}")));
    names.push("presented".into());
    names.extend(Slot::REQUESTABLE.iter().map(|s| format!("provided:{s}")));
    names.extend(Slot::BOOKING.iter().map(|s| format!("booking:{s}")));
    names.push("reservation_confirmed".into());
    names.extend(TURN_BUCKETS.map(String::from));
    names
}

/// Binary flags summarizing the tracked state. What the user just asked for is
/// left to the word counts.
pub fn state_features(state: &DialogState) -> Vec<f64> {
    let flag = |b: bool| b as u8 as f64;
    let mut x = vec![1.0];
    x.extend(Slot::INFORMABLE.iter().map(|s| flag(state.filled_constraints.contains_key(s))));
    x.push(flag(state.presented.is_some()));
    x.extend(Slot::REQUESTABLE.iter().map(|s| flag(state.provided_requestables.contains(s))));
    x.extend(Slot::BOOKING.iter().map(|s| flag(state.booking_filled.has(*s))));
    x.push(flag(state.reservation_confirmed));
    let mut bucket = [0.0; 4];
    bucket[(state.turn.saturating_sub(1) as usize / 3).min(3)] = 1.0;
    x.extend(bucket);
    x
}

/// Maps a state and utterance to a fixed-length vector for one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Featurizer {
    vocab: BTreeMap<String, usize>,
}

impl Featurizer {
    pub fn new<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut words: Vec<String> = words.into_iter().collect();
        words.sort();
        words.dedup();
        Featurizer {
            vocab: words.into_iter().enumerate().map(|(i, w)| (w, i)).collect(),
        }
    }

    /// Vocabulary of user-turn tokens seen at least `min_count` times.
    pub fn from_dialogs(dialogs: &[Dialog], min_count: usize) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in dialogs.iter().flat_map(|d| d.user_turns()) {
            for w in t.tokens() {
                *counts.entry(w.to_string()).or_default() += 1;
            }
        }
        Featurizer::new(counts.into_iter().filter(|(_, c)| *c >= min_count).map(|(w, _)| w))
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn dim(&self) -> usize {
        state_feature_names().len() + self.vocab.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = state_feature_names();
        let mut words: Vec<(&String, &usize)> = self.vocab.iter().collect();
        words.sort_by_key(|(_, i)| **i);
        names.extend(words.into_iter().map(|(w, _)| format!("word:{w}")));
        names
    }

    /// Out-of-vocabulary words are ignored.
    pub fn rl_state(&self, state: &DialogState, utterance: &str) -> Vec<f64> {
        let mut x = state_features(state);
        let base = x.len();
        x.resize(base + self.vocab.len(), 0.0);
        for w in tokenize(utterance) {
            if let Some(i) = self.vocab.get(&w) {
                x[base + i] += 1.0;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_matches_names_and_counts_words() {
        let f = Featurizer::new(["cheap", "food", "want"].map(String::from));
        let state = DialogState {
            turn: 10,
            ..Default::default()
        };
        let x = f.rl_state(&state, "I want cheap cheap food , thai");
        assert_eq!(x.len(), f.dim());
        assert_eq!(f.feature_names().len(), f.dim());
        let names = f.feature_names();
        let at = |n: &str| x[names.iter().position(|m| m == n).unwrap()];
        assert_eq!(at("word:cheap"), 2.0);
        assert_eq!(at("word:want"), 1.0);
        assert_eq!(at("turn=9+"), 1.0);
    }
}
