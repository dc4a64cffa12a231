//! Rolling out one dialog between a user simulator and a system policy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dialog_system::{mask, ActionMask, SystemCore, SystemPolicy};
use crate::domain::{
    goal_satisfied, Dialog, DialogState, Goal, Outcome, SystemAct, SystemActKind, Turn, UserActKind, MAX_TURNS,
};
use crate::simulator::UserSimulator;
use crate::SimRng;

/// Per-turn reward: every turn costs 0.1, the last one adds the task outcome.
pub fn step_reward(outcome: Outcome) -> f64 {
    match outcome {
        Outcome::Ongoing => -0.1,
        Outcome::Success => 1.0 - 0.1,
        Outcome::Failure => -1.0 - 0.1,
    }
}

/// `G_t = r_t + gamma * G_{t+1}`.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (g, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *g = acc;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// The policy's view of the state; empty for policies without one.
    pub features: Vec<f64>,
    pub mask: ActionMask,
    pub action: SystemActKind,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn returns(&self, gamma: f64) -> Vec<f64> {
        discounted_returns(&self.rewards(), gamma)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// After a success, let the user take one more turn and the system answer it,
    /// so transcripts end the way people end them. Not part of the trajectory.
    pub close_on_success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub trajectory: Trajectory,
    pub dialog: Dialog,
    /// Why the episode stopped early, if a component failed.
    pub aborted: Option<String>,
}

/// Runs one dialog for `goal`. Ends after the first system turn at which the goal
/// is settled, the system says goodbye, the user has left or the turn cap is hit.
pub fn run_episode(
    sim: &mut dyn UserSimulator,
    core: &SystemCore,
    policy: &dyn SystemPolicy,
    goal: &Goal,
    rng: &mut SimRng,
    config: &EpisodeConfig,
) -> Episode {
    sim.reset(goal, rng);
    let mut state = DialogState::default();
    let mut turns = Vec::new();
    let mut steps: Vec<Step> = Vec::new();
    let mut last: Option<(SystemAct, String)> = None;
    let mut aborted = None;
    let mut leaving = false;

    let outcome = loop {
        let user = match sim.respond(last.as_ref().map(|(a, t)| (a, t.as_str())), rng) {
            Ok(u) => u,
            Err(e) => {
                aborted = Some(e.to_string());
                break Outcome::Failure;
            }
        };
        leaving = user.done && user.act.as_ref().is_none_or(|a| a.kind == UserActKind::Goodbye);
        turns.push(Turn::user(user.utterance.clone(), user.act));
        let (_, next) = core.understand(&state, &user.utterance, rng);
        state = next;
        let m = mask(&state);
        let features = policy.rl_state(&state, &user.utterance).unwrap_or_default();
        let action = policy.choose(&state, &user.utterance, &m, rng);
        let (act, text) = match core.respond(action, &mut state, &goal.id) {
            Ok(r) => r,
            Err(e) => {
                aborted = Some(e.to_string());
                break Outcome::Failure;
            }
        };
        turns.push(Turn::system(text.clone(), act.clone()).with_state(state.clone()));
        let mut outcome = goal_satisfied(goal, &state);
        if outcome == Outcome::Ongoing && (leaving || action == SystemActKind::Goodbye) {
            outcome = Outcome::Failure;
        }
        steps.push(Step {
            features,
            mask: m,
            action,
            reward: step_reward(outcome),
        });
        last = Some((act, text));
        if outcome != Outcome::Ongoing {
            break outcome;
        }
    };
    if aborted.is_some() {
        if let Some(s) = steps.last_mut() {
            s.reward = step_reward(Outcome::Failure);
        }
    }

    let closed = last.as_ref().is_some_and(|(a, _)| a.kind == SystemActKind::Goodbye);
    if config.close_on_success && outcome == Outcome::Success && !leaving && !closed && state.turn < MAX_TURNS {
        close(sim, core, policy, goal, rng, &mut state, &mut turns, last.as_ref());
    }

    Episode {
        trajectory: Trajectory { steps, outcome },
        dialog: Dialog {
            id: goal.id.clone(),
            goal: goal.clone(),
            turns,
            outcome,
        },
        aborted,
    }
}

#[allow(clippy::too_many_arguments)]
fn close(
    sim: &mut dyn UserSimulator,
    core: &SystemCore,
    policy: &dyn SystemPolicy,
    goal: &Goal,
    rng: &mut SimRng,
    state: &mut DialogState,
    turns: &mut Vec<Turn>,
    last: Option<&(SystemAct, String)>,
) {
    let Ok(user) = sim.respond(last.map(|(a, t)| (a, t.as_str())), rng) else {
        return;
    };
    turns.push(Turn::user(user.utterance.clone(), user.act));
    let (_, next) = core.understand(state, &user.utterance, rng);
    *state = next;
    let action = policy.choose(state, &user.utterance, &mask(state), rng);
    if let Ok((act, text)) = core.respond(action, state, &goal.id) {
        turns.push(Turn::system(text, act).with_state(state.clone()));
    } else {
        turns.pop();
    }
}

/// Fraction of `n` dialogs that succeed, goals drawn uniformly from `goals`.
pub fn success_rate(
    sim: &mut dyn UserSimulator,
    core: &SystemCore,
    policy: &dyn SystemPolicy,
    goals: &[Goal],
    n: usize,
    seed: u64,
) -> f64 {
    if n == 0 || goals.is_empty() {
        return 0.0;
    }
    let mut rng = crate::seeded(seed);
    let mut wins = 0;
    for _ in 0..n {
        let goal = &goals[rng.gen_range(0..goals.len())];
        let ep = run_episode(sim, core, policy, goal, &mut rng, &EpisodeConfig::default());
        wins += (ep.trajectory.outcome == Outcome::Success) as usize;
    }
    wins as f64 / n as f64
}
