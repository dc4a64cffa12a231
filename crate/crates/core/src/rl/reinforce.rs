//! Score-function policy gradient with a batch-mean baseline.

use serde::{Deserialize, Serialize};

use super::episode::Trajectory;
use super::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    None,
    /// Mean of every return in the batch.
    BatchMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateConfig {
    pub step_size: f64,
    pub gamma: f64,
    pub baseline: Baseline,
    pub optimizer: OptimizerKind,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        UpdateConfig {
            step_size: 0.01,
            gamma: 0.9,
            baseline: Baseline::BatchMean,
            optimizer: OptimizerKind::Adam,
        }
    }
}

/// Weighted log-likelihood terms of one batch: `(features, mask, action, weight)`.
fn terms(batch: &[Trajectory], gamma: f64, baseline: Baseline) -> Vec<(&[f64], [bool; 6], usize, f64)> {
    let returns: Vec<Vec<f64>> = batch.iter().map(|t| t.returns(gamma)).collect();
    let all: Vec<f64> = returns.iter().flatten().copied().collect();
    let b = match baseline {
        Baseline::None => 0.0,
        Baseline::BatchMean if all.is_empty() => 0.0,
        Baseline::BatchMean => all.iter().sum::<f64>() / all.len() as f64,
    };
    batch
        .iter()
        .zip(&returns)
        .flat_map(|(t, g)| {
            t.steps
                .iter()
                .zip(g)
                .map(move |(s, g)| (s.features.as_slice(), s.mask.0, s.action.index(), g - b))
        })
        .collect()
}

/// The surrogate `(1/B) sum_i sum_t (G_t - b) log pi(a_t | s_t)` whose gradient
/// is the policy-gradient estimate.
pub fn surrogate(policy: &Policy, batch: &[Trajectory], gamma: f64, baseline: Baseline) -> f64 {
    let n = batch.len().max(1) as f64;
    terms(batch, gamma, baseline)
        .into_iter()
        .map(|(x, m, a, w)| w * policy.log_prob(x, &m[..policy.actions], a))
        .sum::<f64>()
        / n
}

/// Gradient of [`surrogate`].
pub fn policy_gradient(policy: &Policy, batch: &[Trajectory], gamma: f64, baseline: Baseline) -> Vec<f64> {
    let n = batch.len().max(1) as f64;
    let mut grad = vec![0.0; policy.len()];
    for (x, m, a, w) in terms(batch, gamma, baseline) {
        if w == 0.0 {
            continue;
        }
        for (g, d) in grad.iter_mut().zip(policy.grad_log_prob(x, &m[..policy.actions], a)) {
            *g += w * d / n;
        }
    }
    grad
}

/// Optimizer state carried across updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Optimizer {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(kind: OptimizerKind, params: usize) -> Self {
        Optimizer {
            kind,
            m: vec![0.0; params],
            v: vec![0.0; params],
            t: 0,
        }
    }

    /// Ascent step along `grad`.
    pub fn apply(&mut self, params: &mut [f64], grad: &[f64], step: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p += step * g;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - Self::BETA1.powi(self.t as i32);
                let c2 = 1.0 - Self::BETA2.powi(self.t as i32);
                for i in 0..params.len() {
                    self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
                    self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
                    params[i] += step * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub applied: bool,
    pub grad_norm: f64,
}

/// One ascent step on the batch. Non-finite gradients leave the policy untouched.
pub fn reinforce_update(
    policy: &mut Policy,
    optimizer: &mut Optimizer,
    batch: &[Trajectory],
    config: &UpdateConfig,
) -> UpdateReport {
    let grad = policy_gradient(policy, batch, config.gamma, config.baseline);
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !grad_norm.is_finite() {
        log::warn!("skipping update with non-finite gradient");
        return UpdateReport {
            applied: false,
            grad_norm,
        };
    }
    optimizer.apply(&mut policy.params, &grad, config.step_size);
    UpdateReport {
        applied: true,
        grad_norm,
    }
}
