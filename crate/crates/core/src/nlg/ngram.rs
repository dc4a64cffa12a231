//! Act-conditioned trigram generator over delexicalized user utterances.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Gazetteer;
use crate::domain::{Dialog, Slot, Speaker, UserAct, UserActKind};
use crate::text::placeholder;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const MAX_TOKENS: usize = 30;

/// Conditioning key: act kind plus the names of the slots it carries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActSignature {
    pub kind: UserActKind,
    pub slots: BTreeSet<Slot>,
}

impl ActSignature {
    pub fn of(act: &UserAct) -> Self {
        ActSignature {
            kind: act.kind,
            slots: act.slot_names(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Trigrams {
    /// Output vocabulary, `</s>` included, `<s>` excluded.
    vocab: Vec<String>,
    /// `"u v"` → (next token → count).
    counts: BTreeMap<String, BTreeMap<String, u32>>,
    utterances: usize,
}

impl Trigrams {
    fn add(&mut self, tokens: &[String]) {
        let mut seq = vec![BOS.to_string(), BOS.to_string()];
        seq.extend(tokens.iter().cloned());
        seq.push(EOS.to_string());
        for w in seq.windows(3) {
            *self
                .counts
                .entry(format!("{} {}", w[0], w[1]))
                .or_default()
                .entry(w[2].clone())
                .or_default() += 1;
        }
        self.utterances += 1;
    }

    fn finish(&mut self) {
        let mut vocab = BTreeSet::new();
        for next in self.counts.values() {
            vocab.extend(next.keys().cloned());
        }
        self.vocab = vocab.into_iter().collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondNgramLM {
    pub k: f64,
    pub min_utterances: usize,
    models: BTreeMap<String, Trigrams>,
}

fn key(sig: &ActSignature) -> String {
    let slots: Vec<&str> = sig.slots.iter().map(|s| s.as_str()).collect();
    format!("{}|{}", sig.kind, slots.join(","))
}

impl CondNgramLM {
    /// Trains from `(signature, delexicalized tokens)` pairs; signatures with
    /// fewer than `min_utterances` examples are left out.
    pub fn train<I>(examples: I, k: f64, min_utterances: usize) -> Self
    where
        I: IntoIterator<Item = (ActSignature, Vec<String>)>,
    {
        let mut models: BTreeMap<String, Trigrams> = BTreeMap::new();
        for (sig, tokens) in examples {
            models.entry(key(&sig)).or_default().add(&tokens);
        }
        models.retain(|_, m| m.utterances >= min_utterances);
        for m in models.values_mut() {
            m.finish();
        }
        CondNgramLM {
            k,
            min_utterances,
            models,
        }
    }

    pub fn from_dialogs(dialogs: &[Dialog], gazetteer: &Gazetteer) -> Self {
        let examples = dialogs.iter().flat_map(|d| {
            d.turns
                .iter()
                .filter(|t| t.speaker == Speaker::User)
                .filter_map(|t| Some((ActSignature::of(t.user_act()?), gazetteer.delexicalize_text(&t.utterance))))
        });
        CondNgramLM::train(examples, 0.1, 20)
    }

    pub fn knows(&self, sig: &ActSignature) -> bool {
        self.models.contains_key(&key(sig))
    }

    pub fn signatures(&self) -> usize {
        self.models.len()
    }

    /// Smoothed `p(next | u v)` for every vocabulary token, in vocabulary order.
    pub fn distribution(&self, sig: &ActSignature, u: &str, v: &str) -> Option<Vec<(&str, f64)>> {
        let m = self.models.get(&key(sig))?;
        let empty = BTreeMap::new();
        let row = m.counts.get(&format!("{u} {v}")).unwrap_or(&empty);
        let total: u32 = row.values().sum();
        let denom = total as f64 + self.k * m.vocab.len() as f64;
        Some(
            m.vocab
                .iter()
                .map(|w| {
                    let c = row.get(w).copied().unwrap_or(0) as f64;
                    (w.as_str(), (c + self.k) / denom)
                })
                .collect(),
        )
    }

    /// Generates a delexicalized utterance. Placeholders the act cannot fill are
    /// never emitted. `temperature == 0` is greedy (ties to the first token).
    pub fn generate<R: Rng>(&self, act: &UserAct, temperature: f64, rng: &mut R) -> Option<String> {
        let sig = ActSignature::of(act);
        let fillable: BTreeSet<&str> = act
            .slots()
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(s, _)| s.as_str())
            .collect();
        let (mut u, mut v) = (BOS.to_string(), BOS.to_string());
        let mut out: Vec<String> = Vec::new();
        while out.len() < MAX_TOKENS {
            let dist = self.distribution(&sig, &u, &v)?;
            let allowed: Vec<(&str, f64)> = dist
                .into_iter()
                .filter(|(w, _)| placeholder(w).is_none_or(|p| fillable.contains(p)))
                .collect();
            let next = if temperature <= 0.0 {
                let mut best = allowed[0];
                for c in &allowed[1..] {
                    if c.1 > best.1 {
                        best = *c;
                    }
                }
                best.0
            } else {
                let weights: Vec<f64> = allowed.iter().map(|(_, p)| p.powf(1.0 / temperature)).collect();
                let total: f64 = weights.iter().sum();
                let mut x = rng.gen::<f64>() * total;
                let mut chosen = allowed[allowed.len() - 1].0;
                for ((w, _), p) in allowed.iter().zip(&weights) {
                    if x < *p {
                        chosen = w;
                        break;
                    }
                    x -= p;
                }
                chosen
            };
            if next == EOS {
                break;
            }
            out.push(next.to_string());
            u = std::mem::replace(&mut v, next.to_string());
        }
        Some(out.join(" "))
    }
}
