//! The training loop: epsilon-greedy rollouts, batched updates and periodic
//! frozen evaluation.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, success_rate, EpisodeConfig, Trajectory};
use super::features::Featurizer;
use super::policy::Policy;
use super::reinforce::{reinforce_update, Baseline, Optimizer, OptimizerKind, UpdateConfig};
use crate::dialog_system::{ActionMask, SystemCore, SystemPolicy};
use crate::domain::{DialogState, Goal, Outcome, SystemActKind};
use crate::error::{Error, Result};
use crate::simulator::{SimKind, UserSimulator};
use crate::{derive_seed, seeded, SimRng};

/// A learned policy together with the featurizer it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlAgent {
    pub featurizer: Featurizer,
    pub policy: Policy,
    #[serde(default)]
    pub epsilon: f64,
}

impl RlAgent {
    pub fn new(featurizer: Featurizer, hidden: Option<usize>, rng: &mut SimRng) -> Self {
        let dim = featurizer.dim();
        let actions = SystemActKind::ALL.len();
        let policy = match hidden {
            Some(w) => Policy::with_hidden(dim, actions, w, rng),
            None => Policy::linear(dim, actions),
        };
        RlAgent {
            featurizer,
            policy,
            epsilon: 0.0,
        }
    }

    /// The same policy without exploration.
    pub fn frozen(&self) -> Self {
        RlAgent {
            epsilon: 0.0,
            ..self.clone()
        }
    }
}

impl SystemPolicy for RlAgent {
    fn choose(&self, state: &DialogState, utterance: &str, mask: &ActionMask, rng: &mut SimRng) -> SystemActKind {
        let x = self.featurizer.rl_state(state, utterance);
        SystemActKind::ALL[self.policy.select_action(&x, &mask.0, self.epsilon, rng)]
    }

    fn rl_state(&self, state: &DialogState, utterance: &str) -> Option<Vec<f64>> {
        Some(self.featurizer.rl_state(state, utterance))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub batch: usize,
    pub epsilon: f64,
    pub update: UpdateConfig,
    /// Width of the optional tanh hidden layer.
    pub hidden: Option<usize>,
    pub eval_every: usize,
    pub eval_dialogs: usize,
    /// Stop once frozen evaluation reaches this for `patience` checkpoints in a row.
    pub target: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 30_000,
            batch: 16,
            epsilon: 0.1,
            update: UpdateConfig {
                step_size: 0.01,
                gamma: 0.9,
                baseline: Baseline::BatchMean,
                optimizer: OptimizerKind::Adam,
            },
            hidden: None,
            eval_every: 1000,
            eval_dialogs: 100,
            target: 0.9,
            patience: 3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Seed of the frozen evaluation run at every checkpoint.
    pub fn eval_seed(&self) -> u64 {
        derive_seed(self.seed, "eval")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub episode: usize,
    pub success: f64,
}

/// One line of `train_log.jsonl`, written per update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub update: usize,
    pub episode: usize,
    pub mean_return: f64,
    pub batch_success: f64,
    pub mean_turns: f64,
    pub grad_norm: f64,
    pub applied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub agent: RlAgent,
    pub curve: Vec<Checkpoint>,
    pub log: Vec<LogEntry>,
    pub episodes_run: usize,
    pub config: TrainConfig,
    pub sim: SimKind,
}

impl TrainOutcome {
    /// Index (1-based) of the first checkpoint at or above `level`.
    pub fn checkpoints_to(&self, level: f64) -> Option<usize> {
        self.curve.iter().position(|c| c.success >= level).map(|i| i + 1)
    }

    pub fn final_success(&self) -> f64 {
        self.curve.last().map_or(0.0, |c| c.success)
    }

    /// Writes `policy.json`, `curve.csv` and `train_log.jsonl`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let saved = SavedPolicy {
            sim: self.sim,
            config: self.config,
            agent: self.agent.frozen(),
        };
        fs::write(dir.join("policy.json"), serde_json::to_string(&saved)? + "\n")?;
        let mut csv = csv::Writer::from_path(dir.join("curve.csv"))?;
        csv.write_record(["episode", "success"])?;
        for c in &self.curve {
            csv.write_record([c.episode.to_string(), format!("{:.4}", c.success)])?;
        }
        csv.flush()?;
        let mut log = fs::File::create(dir.join("train_log.jsonl"))?;
        for e in &self.log {
            serde_json::to_writer(&mut log, e)?;
            log.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// The on-disk form of a trained system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedPolicy {
    pub sim: SimKind,
    pub config: TrainConfig,
    pub agent: RlAgent,
}

impl SavedPolicy {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Trains a fresh policy against `sim` on goals drawn from `goals`.
/// Rollouts run on one thread, so a seed fixes the whole run.
pub fn train(
    sim: &mut dyn UserSimulator,
    core: &SystemCore,
    goals: &[Goal],
    featurizer: Featurizer,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if goals.is_empty() {
        return Err(Error::EmptyGoalDb);
    }
    let mut rng = seeded(config.seed);
    let mut agent = RlAgent::new(featurizer, config.hidden, &mut rng);
    agent.epsilon = config.epsilon;
    let mut optimizer = Optimizer::new(config.update.optimizer, agent.policy.len());
    let mut batch: Vec<Trajectory> = Vec::with_capacity(config.batch);
    let mut curve = Vec::new();
    let mut log = Vec::new();
    let mut streak = 0;
    let mut episodes_run = 0;
    let batch_size = config.batch.max(1);

    for episode in 1..=config.episodes {
        let goal = &goals[rng.gen_range(0..goals.len())];
        let ep = run_episode(sim, core, &agent, goal, &mut rng, &EpisodeConfig::default());
        if let Some(why) = &ep.aborted {
            log::debug!("episode {episode} aborted: {why}");
        }
        batch.push(ep.trajectory);
        episodes_run = episode;

        if batch.len() == batch_size {
            let report = reinforce_update(&mut agent.policy, &mut optimizer, &batch, &config.update);
            let n = batch.len() as f64;
            log.push(LogEntry {
                update: log.len() + 1,
                episode,
                mean_return: batch
                    .iter()
                    .map(|t| t.returns(config.update.gamma).first().copied().unwrap_or(0.0))
                    .sum::<f64>()
                    / n,
                batch_success: batch.iter().filter(|t| t.outcome == Outcome::Success).count() as f64 / n,
                mean_turns: batch.iter().map(|t| t.len() as f64).sum::<f64>() / n,
                grad_norm: report.grad_norm,
                applied: report.applied,
            });
            batch.clear();
        }

        if config.eval_every > 0 && episode % config.eval_every == 0 {
            let success = success_rate(sim, core, &agent.frozen(), goals, config.eval_dialogs, config.eval_seed());
            log::info!("{} episode {episode}: frozen success {success:.3}", sim.kind());
            curve.push(Checkpoint { episode, success });
            streak = if success >= config.target { streak + 1 } else { 0 };
            if config.patience > 0 && streak >= config.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        agent: agent.frozen(),
        curve,
        log,
        episodes_run,
        config: *config,
        sim: sim.kind(),
    })
}
