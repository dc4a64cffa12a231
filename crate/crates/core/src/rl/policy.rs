//! Softmax policy over system acts: linear, or with one tanh hidden layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// All parameters live in one flat vector.
///
/// Linear layout: `W[actions][inputs]`. With a hidden layer of width `h`:
/// `W1[h][inputs]`, `b1[h]`, `W2[actions][h]`, `b2[actions]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub inputs: usize,
    pub actions: usize,
    pub hidden: Option<usize>,
    pub params: Vec<f64>,
}

impl Policy {
    /// All-zero weights: uniform over allowed actions.
    pub fn linear(inputs: usize, actions: usize) -> Self {
        Policy {
            inputs,
            actions,
            hidden: None,
            params: vec![0.0; inputs * actions],
        }
    }

    /// Input weights drawn from `U(-1/sqrt(inputs), 1/sqrt(inputs))`, output weights zero.
    pub fn with_hidden<R: Rng + ?Sized>(inputs: usize, actions: usize, width: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (inputs.max(1) as f64).sqrt();
        let mut params: Vec<f64> = (0..width * inputs).map(|_| rng.gen_range(-scale..scale)).collect();
        params.resize(width * inputs + width + actions * width + actions, 0.0);
        Policy {
            inputs,
            actions,
            hidden: Some(width),
            params,
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn hidden_layer(&self, x: &[f64], h: usize) -> Vec<f64> {
        let (w1, rest) = self.params.split_at(h * self.inputs);
        (0..h)
            .map(|j| {
                let row = &w1[j * self.inputs..(j + 1) * self.inputs];
                (dot(row, x) + rest[j]).tanh()
            })
            .collect()
    }

    /// Unnormalized action scores.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.inputs, "feature dimension mismatch");
        match self.hidden {
            None => (0..self.actions)
                .map(|a| dot(&self.params[a * self.inputs..(a + 1) * self.inputs], x))
                .collect(),
            Some(h) => {
                let z = self.hidden_layer(x, h);
                let off = h * self.inputs + h;
                let w2 = &self.params[off..off + self.actions * h];
                let b2 = &self.params[off + self.actions * h..];
                (0..self.actions).map(|a| dot(&w2[a * h..(a + 1) * h], &z) + b2[a]).collect()
            }
        }
    }

    /// Softmax restricted to allowed actions; masked actions get exactly 0.
    pub fn probs(&self, x: &[f64], mask: &[bool]) -> Vec<f64> {
        masked_softmax(&self.scores(x), mask)
    }

    pub fn log_prob(&self, x: &[f64], mask: &[bool], action: usize) -> f64 {
        let s = self.scores(x);
        let max = allowed_max(&s, mask);
        let z: f64 = s.iter().zip(mask).filter(|(_, m)| **m).map(|(v, _)| (v - max).exp()).sum();
        s[action] - max - z.ln()
    }

    /// Gradient of `log pi(action | x)` with respect to every parameter.
    pub fn grad_log_prob(&self, x: &[f64], mask: &[bool], action: usize) -> Vec<f64> {
        let p = self.probs(x, mask);
        // d log pi / d score_k; zero for masked k since their probability is exactly 0
        let ds: Vec<f64> = (0..self.actions)
            .map(|k| (k == action) as u8 as f64 - p[k])
            .collect();
        let mut g = vec![0.0; self.params.len()];
        match self.hidden {
            None => {
                for (k, d) in ds.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    for (gi, xi) in g[k * self.inputs..(k + 1) * self.inputs].iter_mut().zip(x) {
                        *gi = d * xi;
                    }
                }
            }
            Some(h) => {
                let z = self.hidden_layer(x, h);
                let off = h * self.inputs + h;
                let w2 = &self.params[off..off + self.actions * h];
                for (k, d) in ds.iter().enumerate() {
                    for j in 0..h {
                        g[off + k * h + j] = d * z[j];
                    }
                    g[off + self.actions * h + k] = *d;
                }
                for j in 0..h {
                    let back: f64 = (0..self.actions).map(|k| ds[k] * w2[k * h + j]).sum();
                    let dpre = back * (1.0 - z[j] * z[j]);
                    if dpre == 0.0 {
                        continue;
                    }
                    for (gi, xi) in g[j * self.inputs..(j + 1) * self.inputs].iter_mut().zip(x) {
                        *gi = dpre * xi;
                    }
                    g[h * self.inputs + j] = dpre;
                }
            }
        }
        g
    }

    /// With probability `epsilon` a uniformly random allowed action, otherwise a
    /// draw from the masked softmax. Panics if nothing is allowed.
    pub fn select_action<R: Rng + ?Sized>(&self, x: &[f64], mask: &[bool], epsilon: f64, rng: &mut R) -> usize {
        let allowed: Vec<usize> = (0..self.actions).filter(|a| mask[*a]).collect();
        assert!(!allowed.is_empty(), "no action allowed");
        if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
            return allowed[rng.gen_range(0..allowed.len())];
        }
        let p = self.probs(x, mask);
        let mut u = rng.gen::<f64>();
        for &a in &allowed {
            if u < p[a] {
                return a;
            }
            u -= p[a];
        }
        *allowed.last().expect("non-empty")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn allowed_max(scores: &[f64], mask: &[bool]) -> f64 {
    scores
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn masked_softmax(scores: &[f64], mask: &[bool]) -> Vec<f64> {
    let max = allowed_max(scores, mask);
    let e: Vec<f64> = scores
        .iter()
        .zip(mask)
        .map(|(s, m)| if *m { (s - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| if z > 0.0 { v / z } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;

    #[test]
    fn masked_actions_have_zero_probability() {
        let mut p = Policy::linear(2, 3);
        p.params = vec![5.0, 1.0, -2.0, 0.5, 3.0, 3.0];
        let probs = p.probs(&[1.0, 2.0], &[true, false, true]);
        assert_eq!(probs[1], 0.0);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_allowed_action_is_always_chosen() {
        let p = Policy::with_hidden(3, 4, 5, &mut seeded(1));
        let mut rng = seeded(2);
        for _ in 0..200 {
            assert_eq!(p.select_action(&[1.0, 0.0, 2.0], &[false, false, true, false], 0.0, &mut rng), 2);
        }
    }
}
