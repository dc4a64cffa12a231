use thiserror::Error;

use crate::domain::{Slot, SystemActKind, UserActKind};

#[derive(Debug, Error)]
pub enum Error {
    #[error("slot `{slot}` cannot be attached to a {kind} act")]
    SlotNotAllowed { kind: UserActKind, slot: Slot },

    #[error("invalid goal: {0}")]
    InvalidGoal(String),

    #[error("unknown {what}: `{value}`")]
    Unknown { what: &'static str, value: String },

    #[error("malformed corpus JSON at line {line}, column {column}: {message}")]
    CorpusParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("corpus contains no restaurant-domain dialogs")]
    EmptyCorpus,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("goal database is empty")]
    EmptyGoalDb,

    #[error("no fillable template for {act} with slots {slots:?}")]
    NoTemplate { act: String, slots: Vec<String> },

    #[error("placeholder `<{0}>` cannot be resolved")]
    UnresolvedPlaceholder(String),

    #[error("no retrieval candidate for {0}")]
    NoCandidate(String),

    #[error("retrieval index is empty")]
    EmptyIndex,

    #[error("act model training refused: {0}")]
    DegenerateCorpus(String),

    #[error("system act {0} is not handled by this simulator")]
    UnexpectedSystemAct(SystemActKind),

    #[error("simulated dialog {dialog} failed: {reason}")]
    SimulationFailed { dialog: usize, reason: String },

    #[error("missing policies for: {0:?}")]
    MissingPolicies(Vec<String>),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("session `{0}` not found")]
    SessionNotFound(String),

    #[error("session `{0}` is closed")]
    SessionClosed(String),

    #[error("session `{0}` is still open")]
    SessionOpen(String),

    #[error("survey already submitted for session `{0}`")]
    DuplicateSurvey(String),

    #[error("invalid survey: {0}")]
    InvalidSurvey(String),

    #[error("invalid regex: {0}")]
    Regex(#[from] regex::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
