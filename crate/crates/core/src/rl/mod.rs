//! Policy-gradient training of the system's act selection.

mod episode;
mod features;
mod policy;
mod reinforce;
mod train;

pub use episode::{discounted_returns, run_episode, step_reward, success_rate, Episode, EpisodeConfig, Step, Trajectory};
pub use features::{state_feature_names, state_features, Featurizer};
pub use policy::{masked_softmax, Policy};
pub use reinforce::{
    policy_gradient, reinforce_update, surrogate, Baseline, Optimizer, OptimizerKind, UpdateConfig, UpdateReport,
};
pub use train::{train, Checkpoint, LogEntry, RlAgent, SavedPolicy, TrainConfig, TrainOutcome};
