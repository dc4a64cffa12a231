use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Gazetteer;
use crate::domain::{Dialog, Slot, Speaker, UserAct, UserActKind};
use crate::text::placeholder;

/// A stored user turn with the context it answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: usize,
    pub kind: UserActKind,
    pub slots: BTreeSet<Slot>,
    /// Delexicalized utterance.
    pub utterance: String,
    /// Distinct placeholder names in `utterance`, sorted.
    holes: Vec<String>,
    /// Sparse, L2-normalized tf-idf vector of the context.
    context: Vec<(usize, f64)>,
}

impl Candidate {
    pub fn placeholders(&self) -> BTreeSet<&str> {
        self.holes.iter().map(String::as_str).collect()
    }

    /// Every placeholder can be filled from `fillable`.
    pub fn fits(&self, fillable: &BTreeSet<&str>) -> bool {
        self.holes.iter().all(|h| fillable.contains(h.as_str()))
    }
}

/// A document handed to [`TfIdfIndex::build`].
#[derive(Debug, Clone)]
pub struct Doc {
    pub context: Vec<String>,
    pub kind: UserActKind,
    pub slots: BTreeSet<Slot>,
    pub utterance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfIndex {
    vocab: BTreeMap<String, usize>,
    idf: Vec<f64>,
    candidates: Vec<Candidate>,
}

impl TfIdfIndex {
    /// `idf(t) = ln(N / df(t))` over the candidates' contexts.
    pub fn build(docs: Vec<Doc>) -> Self {
        let mut vocab = BTreeMap::new();
        let mut df: Vec<usize> = Vec::new();
        for d in &docs {
            let distinct: BTreeSet<&String> = d.context.iter().collect();
            for t in distinct {
                let next = vocab.len();
                let id = *vocab.entry(t.clone()).or_insert(next);
                if id == df.len() {
                    df.push(0);
                }
                df[id] += 1;
            }
        }
        let n = docs.len() as f64;
        let idf = df.iter().map(|&d| (n / d as f64).ln()).collect();
        let mut index = TfIdfIndex {
            vocab,
            idf,
            candidates: Vec::new(),
        };
        index.candidates = docs
            .into_iter()
            .enumerate()
            .map(|(id, d)| {
                let holes: BTreeSet<&str> = d.utterance.split(' ').filter_map(placeholder).collect();
                Candidate {
                    id,
                    context: index.vectorize(&d.context),
                    kind: d.kind,
                    slots: d.slots,
                    holes: holes.into_iter().map(String::from).collect(),
                    utterance: d.utterance,
                }
            })
            .collect();
        index
    }

    /// One candidate per annotated user turn. The context is the preceding system
    /// utterance and the user's previous utterance, both delexicalized.
    pub fn from_dialogs(dialogs: &[Dialog], gazetteer: &Gazetteer) -> Self {
        let mut docs = Vec::new();
        for d in dialogs {
            for (i, turn) in d.turns.iter().enumerate() {
                if turn.speaker != Speaker::User {
                    continue;
                }
                let Some(act) = turn.user_act() else { continue };
                let mut context = Vec::new();
                if i >= 1 {
                    context.extend(gazetteer.delexicalize_text(&d.turns[i - 1].utterance));
                }
                if i >= 2 {
                    context.extend(gazetteer.delexicalize_text(&d.turns[i - 2].utterance));
                }
                docs.push(Doc {
                    context,
                    kind: act.kind,
                    slots: act.slot_names(),
                    utterance: gazetteer.delexicalize_text(&turn.utterance).join(" "),
                });
            }
        }
        TfIdfIndex::build(docs)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocab.get(term).map(|&i| self.idf[i])
    }

    /// Raw term counts times idf, L2-normalized; unknown terms are dropped.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<(usize, f64)> {
        let mut tf: HashMap<usize, f64> = HashMap::new();
        for t in tokens {
            if let Some(&i) = self.vocab.get(t.as_ref()) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let mut v: Vec<(usize, f64)> = tf.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        v.sort_by_key(|(i, _)| *i);
        let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut v {
                *w /= norm;
            }
        } else {
            v.clear();
        }
        v
    }

    /// Cosine similarity between a query and a stored candidate context.
    pub fn cosine(&self, query: &[(usize, f64)], candidate: &Candidate) -> f64 {
        sparse_dot(query, &candidate.context)
    }

    /// Highest-cosine candidate passing `keep`; ties go to the lowest id.
    pub fn best<S: AsRef<str>>(&self, context: &[S], keep: impl Fn(&Candidate) -> bool) -> Option<(&Candidate, f64)> {
        let q = self.vectorize(context);
        let mut best: Option<(&Candidate, f64)> = None;
        for c in self.candidates.iter().filter(|c| keep(c)) {
            let s = self.cosine(&q, c);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        best
    }

    /// Best candidate realizing exactly this act: same kind, same slot names,
    /// and no placeholder the act cannot fill.
    pub fn retrieve<S: AsRef<str>>(&self, act: &UserAct, context: &[S]) -> Option<&Candidate> {
        let names = act.slot_names();
        let fillable: BTreeSet<&str> = act
            .slots()
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(s, _)| s.as_str())
            .collect();
        self.best(context, |c| {
            c.kind == act.kind && c.slots == names && c.fits(&fillable)
        })
        .map(|(c, _)| c)
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(context: &str, utterance: &str) -> Doc {
        Doc {
            context: context.split(' ').map(str::to_string).collect(),
            kind: UserActKind::Goodbye,
            slots: BTreeSet::new(),
            utterance: utterance.into(),
        }
    }

    #[test]
    fn identical_context_wins_and_empty_query_takes_first() {
        let index = TfIdfIndex::build(vec![
            doc("what food would you like", "a"),
            doc("booking was successful", "b"),
            doc("what area would you like", "c"),
        ]);
        let ctx: Vec<&str> = "booking was successful".split(' ').collect();
        assert_eq!(index.best(&ctx, |_| true).unwrap().0.utterance, "b");
        let empty: Vec<&str> = Vec::new();
        assert_eq!(index.best(&empty, |_| true).unwrap().0.id, 0);
    }

    #[test]
    fn cosine_is_scale_invariant() {
        let index = TfIdfIndex::build(vec![doc("a b c", "x"), doc("b c d", "y"), doc("d e", "z")]);
        let q1 = index.vectorize(&["a", "d"]);
        let q2 = index.vectorize(&["a", "d", "a", "d", "a", "d"]);
        for c in index.candidates() {
            assert!((index.cosine(&q1, c) - index.cosine(&q2, c)).abs() < 1e-12);
        }
    }
}
