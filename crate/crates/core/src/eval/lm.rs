//! Word trigram language model with add-k smoothing over a closed vocabulary.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// The default smoothing constant.
pub const ADD_K: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigramLm {
    k: f64,
    /// Predictable tokens: training words, `</s>` and `<unk>`.
    vocab: HashMap<String, u32>,
    trigrams: HashMap<(u32, u32, u32), u32>,
    contexts: HashMap<(u32, u32), u32>,
}

impl TrigramLm {
    /// A model with no counts: every token of `words`, `</s>` and `<unk>` is
    /// equally likely in every context.
    pub fn with_vocab<'a, I: IntoIterator<Item = &'a str>>(words: I, k: f64) -> Self {
        let mut vocab = HashMap::new();
        for w in words.into_iter().chain([EOS, UNK]) {
            if w != BOS {
                let next = vocab.len() as u32;
                vocab.entry(w.to_string()).or_insert(next);
            }
        }
        TrigramLm {
            k,
            vocab,
            trigrams: HashMap::new(),
            contexts: HashMap::new(),
        }
    }

    /// Trains on tokenized sentences. Words seen fewer than `min_count` times
    /// are left out of the vocabulary and counted as `<unk>`. Fails if there is
    /// not a single token.
    pub fn train<S: AsRef<str>>(sentences: &[Vec<S>], k: f64, min_count: usize) -> Result<Self> {
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(Error::EmptyInput("language model training sentences"));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for w in sentences.iter().flatten() {
            *counts.entry(w.as_ref()).or_default() += 1;
        }
        let mut words: Vec<&str> = counts.into_iter().filter(|(_, c)| *c >= min_count).map(|(w, _)| w).collect();
        words.sort_unstable();
        let mut lm = TrigramLm::with_vocab(words, k);
        for s in sentences.iter().filter(|s| !s.is_empty()) {
            let ids = lm.encode(s);
            for (u, v, w) in windows(&ids) {
                *lm.trigrams.entry((u, v, w)).or_default() += 1;
                *lm.contexts.entry((u, v)).or_default() += 1;
            }
        }
        Ok(lm)
    }

    /// Size of the predicted vocabulary, `</s>` and `<unk>` included.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    const BOS_ID: u32 = u32::MAX;

    fn id(&self, w: &str) -> u32 {
        self.vocab.get(w).or_else(|| self.vocab.get(UNK)).copied().expect("<unk> is in every vocabulary")
    }

    /// `<s> <s> w1 .. wn </s>` as ids, unknown words mapped to `<unk>`.
    fn encode<S: AsRef<str>>(&self, sentence: &[S]) -> Vec<u32> {
        let mut ids = vec![Self::BOS_ID, Self::BOS_ID];
        ids.extend(sentence.iter().map(|w| self.id(w.as_ref())));
        ids.push(self.id(EOS));
        ids
    }

    fn prob_ids(&self, u: u32, v: u32, w: u32) -> f64 {
        let c3 = self.trigrams.get(&(u, v, w)).copied().unwrap_or(0) as f64;
        let c2 = self.contexts.get(&(u, v)).copied().unwrap_or(0) as f64;
        (c3 + self.k) / (c2 + self.k * self.vocab.len() as f64)
    }

    /// `p(w | u v)`; use `<s>` for positions before the sentence start.
    pub fn prob(&self, u: &str, v: &str, w: &str) -> f64 {
        let id = |t: &str| if t == BOS { Self::BOS_ID } else { self.id(t) };
        self.prob_ids(id(u), id(v), self.id(w))
    }

    /// Total log probability and the number of scored tokens (words plus `</s>`).
    pub fn log_prob<S: AsRef<str>>(&self, sentence: &[S]) -> (f64, usize) {
        let ids = self.encode(sentence);
        let mut lp = 0.0;
        let mut n = 0;
        for (u, v, w) in windows(&ids) {
            lp += self.prob_ids(u, v, w).ln();
            n += 1;
        }
        (lp, n)
    }

    /// Per-word perplexity over `sentences`.
    pub fn perplexity<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> Result<f64> {
        let (lp, n) = sentences.iter().fold((0.0, 0), |(lp, n), s| {
            let (l, c) = self.log_prob(s);
            (lp + l, n + c)
        });
        if n == 0 {
            return Err(Error::EmptyInput("perplexity test sentences"));
        }
        Ok((-lp / n as f64).exp())
    }
}

fn windows(ids: &[u32]) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
    ids.windows(3).map(|w| (w[0], w[1], w[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(text: &[&str]) -> Vec<Vec<String>> {
        text.iter().map(|s| s.split_whitespace().map(String::from).collect()).collect()
    }

    #[test]
    fn distributions_sum_to_one() {
        let lm = TrigramLm::train(&sents(&["a b c", "a b d", "b c"]), 0.1, 1).unwrap();
        for ctx in [(BOS, BOS), (BOS, "a"), ("a", "b"), ("c", "c")] {
            let total: f64 = ["a", "b", "c", "d", EOS, UNK].iter().map(|w| lm.prob(ctx.0, ctx.1, w)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{ctx:?}: {total}");
        }
    }

    #[test]
    fn unknown_words_share_the_unk_mass() {
        let lm = TrigramLm::train(&sents(&["a b"]), 0.1, 1).unwrap();
        assert_eq!(lm.prob("a", "b", "zebra"), lm.prob("a", "b", UNK));
        assert_eq!(lm.vocab_size(), 4);
    }

    #[test]
    fn rare_training_words_become_unk() {
        let lm = TrigramLm::train(&sents(&["a b", "a c"]), 0.1, 2).unwrap();
        assert_eq!(lm.vocab_size(), 3);
        // "b" and "c" were both counted as <unk> after "a"
        assert!((lm.prob(BOS, "a", "b") - 2.1 / 2.3).abs() < 1e-12);
    }
}
