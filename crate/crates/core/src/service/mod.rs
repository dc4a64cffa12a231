//! Live chat sessions between people and the trained systems, with surveys and
//! an aggregate report. Closed sessions are persisted through [`Store`].

mod http;
mod store;
mod survey;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

pub use http::{router, serve};
pub use store::{write_atomic, IndexEntry, Store};
pub use survey::{aggregate, Estimate, SessionSummary, Solved, SurveyForm, SurveyResult, SystemReport};

use crate::corpus::{sample_goal, GoalDb};
use crate::dialog_system::{mask, RulePolicy, SystemCore, SystemPolicy};
use crate::domain::{goal_satisfied, DialogState, Goal, Outcome, SystemActKind, Turn, UserActKind, MAX_TURNS};
use crate::error::{Error, Result};
use crate::rl::SavedPolicy;
use crate::simulator::SimKind;
use crate::{derive_seed, seeded, SimRng};

/// Id of the hand-crafted system.
pub const RULE_SYSTEM: &str = "rule";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Open,
    Finished,
    /// Closed after sitting idle past the timeout.
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub system_id: String,
    /// Seeds the generator the session's turns draw from.
    pub seed: u64,
    pub goal: Goal,
    pub state: DialogState,
    pub transcript: Vec<Turn>,
    pub created: DateTime<Utc>,
    pub last_active: DateTime<Utc>,
    pub closed: Option<DateTime<Utc>>,
    pub status: SessionStatus,
    /// Goal completion when the session closed; `Ongoing` while open.
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survey: Option<SurveyResult>,
}

impl Session {
    pub fn is_open(&self) -> bool {
        self.status == SessionStatus::Open
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            system_id: self.system_id.clone(),
            abandoned: self.status == SessionStatus::Abandoned,
            outcome: self.outcome,
            survey: self.survey,
        }
    }

    fn close(&mut self, status: SessionStatus, now: DateTime<Utc>) {
        self.status = status;
        self.closed = Some(now);
        self.outcome = match goal_satisfied(&self.goal, &self.state) {
            Outcome::Ongoing => Outcome::Failure,
            o => o,
        };
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub goal_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reply {
    pub reply: String,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub systems: BTreeMap<String, SystemReport>,
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceConfig {
    pub seed: u64,
    pub idle_timeout: TimeDelta,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            seed: 0,
            idle_timeout: TimeDelta::minutes(30),
        }
    }
}

/// The rule system plus a frozen copy of every loaded policy, keyed by the
/// simulator it was trained against.
pub fn systems_from(policies: &BTreeMap<SimKind, SavedPolicy>) -> BTreeMap<String, Arc<dyn SystemPolicy>> {
    let mut out: BTreeMap<String, Arc<dyn SystemPolicy>> = BTreeMap::new();
    out.insert(RULE_SYSTEM.to_string(), Arc::new(RulePolicy));
    for (kind, saved) in policies {
        out.insert(kind.as_str().to_string(), Arc::new(saved.agent.frozen()));
    }
    out
}

struct Live {
    session: Session,
    rng: SimRng,
}

pub struct Service {
    core: SystemCore,
    goals: GoalDb,
    systems: BTreeMap<String, Arc<dyn SystemPolicy>>,
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    created: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
    store: Mutex<Store>,
}

impl Service {
    pub fn new(
        core: SystemCore,
        goals: GoalDb,
        systems: BTreeMap<String, Arc<dyn SystemPolicy>>,
        store: Store,
        config: ServiceConfig,
    ) -> Result<Self> {
        if goals.goals.is_empty() {
            return Err(Error::EmptyGoalDb);
        }
        Ok(Service {
            core,
            goals,
            systems,
            config,
            clock: Arc::new(SystemClock),
            created: AtomicU64::new(0),
            sessions: Mutex::new(HashMap::new()),
            store: Mutex::new(store),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn systems(&self) -> Vec<String> {
        self.systems.keys().cloned().collect()
    }

    pub fn create_session(&self, system_id: &str) -> Result<Created> {
        if !self.systems.contains_key(system_id) {
            return Err(Error::Unknown {
                what: "system",
                value: system_id.to_string(),
            });
        }
        let n = self.created.fetch_add(1, Ordering::SeqCst);
        let goal = sample_goal(&self.goals, &mut seeded(derive_seed(self.config.seed, &format!("goal/{n}"))))?.clone();
        let seed = derive_seed(self.config.seed, &format!("session/{n}"));
        let now = self.clock.now();
        let session = Session {
            id: uuid::Uuid::new_v4().simple().to_string(),
            system_id: system_id.to_string(),
            seed,
            goal,
            state: DialogState::default(),
            transcript: Vec::new(),
            created: now,
            last_active: now,
            closed: None,
            status: SessionStatus::Open,
            outcome: Outcome::Ongoing,
            survey: None,
        };
        let created = Created {
            session_id: session.id.clone(),
            goal_text: session.goal.instructions(),
        };
        log::info!("session {} opened with system {system_id}", session.id);
        let live = Live {
            session,
            rng: seeded(seed),
        };
        lock(&self.sessions).insert(created.session_id.clone(), Arc::new(Mutex::new(live)));
        Ok(created)
    }

    /// Runs one user message through understanding, the system's policy and
    /// rendering. The session closes when either side says goodbye or at the turn cap.
    pub fn post_message(&self, id: &str, text: &str) -> Result<Reply> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::EmptyInput("message"));
        }
        let live = self.live(id)?;
        let mut live = lock(&live);
        let now = self.clock.now();
        if !live.session.is_open() {
            return Err(Error::SessionClosed(id.to_string()));
        }
        if self.idle(&live.session, now) {
            self.close(&mut live, SessionStatus::Abandoned, now)?;
            return Err(Error::SessionClosed(id.to_string()));
        }

        let Live { session, rng } = &mut *live;
        let policy = &self.systems[&session.system_id];
        let (nlu, mut state) = self.core.understand(&session.state, text, rng);
        let action = policy.choose(&state, text, &mask(&state), rng);
        let (act, reply) = self.core.respond(action, &mut state, &session.goal.id)?;
        session.transcript.push(Turn::user(text, None));
        session.transcript.push(Turn::system(reply.clone(), act).with_state(state.clone()));
        session.state = state;
        session.last_active = now;

        let done = nlu.act.kind == UserActKind::Goodbye || action == SystemActKind::Goodbye || session.state.turn >= MAX_TURNS;
        if done {
            self.close(&mut live, SessionStatus::Finished, now)?;
        }
        Ok(Reply { reply, done })
    }

    pub fn post_survey(&self, id: &str, survey: SurveyResult) -> Result<()> {
        if let Some(live) = self.find_live(id) {
            let mut live = lock(&live);
            let now = self.clock.now();
            if !(live.session.is_open() && self.idle(&live.session, now)) {
                return Err(Error::SessionOpen(id.to_string()));
            }
            self.close(&mut live, SessionStatus::Abandoned, now)?;
        }
        lock(&self.store).record_survey(id, survey)
    }

    /// The session as it stands, open or closed.
    pub fn session(&self, id: &str) -> Result<Session> {
        if let Some(live) = self.find_live(id) {
            return Ok(lock(&live).session.clone());
        }
        lock(&self.store).load(id)
    }

    pub fn report(&self) -> SurveyReport {
        let store = lock(&self.store);
        SurveyReport {
            systems: aggregate(&self.systems(), store.index().values().map(|e| &e.summary)),
        }
    }

    /// Closes every session idle past the timeout. Returns how many were closed.
    pub fn sweep(&self) -> Result<usize> {
        let now = self.clock.now();
        let open: Vec<Arc<Mutex<Live>>> = lock(&self.sessions).values().cloned().collect();
        let mut closed = 0;
        for live in open {
            let mut live = lock(&live);
            if live.session.is_open() && self.idle(&live.session, now) {
                self.close(&mut live, SessionStatus::Abandoned, now)?;
                closed += 1;
            }
        }
        Ok(closed)
    }

    fn idle(&self, session: &Session, now: DateTime<Utc>) -> bool {
        now - session.last_active >= self.config.idle_timeout
    }

    fn close(&self, live: &mut Live, status: SessionStatus, now: DateTime<Utc>) -> Result<()> {
        live.session.close(status, now);
        log::info!("session {} closed: {:?}, {:?}", live.session.id, status, live.session.outcome);
        lock(&self.store).record_session(&live.session)?;
        lock(&self.sessions).remove(&live.session.id);
        Ok(())
    }

    fn find_live(&self, id: &str) -> Option<Arc<Mutex<Live>>> {
        lock(&self.sessions).get(id).cloned()
    }

    fn live(&self, id: &str) -> Result<Arc<Mutex<Live>>> {
        self.find_live(id).ok_or_else(|| {
            if lock(&self.store).index().contains_key(id) {
                Error::SessionClosed(id.to_string())
            } else {
                Error::SessionNotFound(id.to_string())
            }
        })
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}
