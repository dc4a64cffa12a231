mod common;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeDelta, TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use usersim::dialog_system::{mask, RulePolicy, SystemPolicy};
use usersim::domain::*;
use usersim::rl::{run_episode, EpisodeConfig, RlAgent};
use usersim::service::*;
use usersim::simulator::{SimKind, UserSimulator, UserTurn};
use usersim::{seeded, Result, SimRng};

struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    fn new() -> Arc<Self> {
        Arc::new(ManualClock(Mutex::new(Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap())))
    }

    fn advance(&self, minutes: i64) {
        *self.0.lock().unwrap() += TimeDelta::minutes(minutes);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

/// Rule system, an untrained stochastic policy and a noisy NLU, so sessions draw randomness.
fn service(dir: &std::path::Path, noise: f64, clock: Arc<ManualClock>) -> Service {
    let lab = common::lab();
    let mut systems = systems_from(&BTreeMap::new());
    let agent = RlAgent::new(lab.featurizer(), None, &mut seeded(0));
    systems.insert("untrained".into(), Arc::new(agent));
    let store = Store::open(dir).unwrap();
    let config = ServiceConfig {
        seed: 5,
        ..Default::default()
    };
    Service::new(lab.core.clone().with_nlu_noise(noise), lab.corpus.goals.clone(), systems, store, config)
        .unwrap()
        .with_clock(clock)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
    (status, value)
}

async fn open(app: &Router, system: &str) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({ "system_id": system }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

async fn say(app: &Router, id: &str, text: &str) -> (StatusCode, Value) {
    call(app, "POST", &format!("/sessions/{id}/messages"), Some(json!({ "text": text }))).await
}

fn survey(solved: f64, likert: i64) -> Value {
    json!({
        "solved": solved,
        "satisfaction": likert,
        "efficiency": likert,
        "naturalness": likert,
        "rule_likeness": likert,
    })
}

#[tokio::test]
async fn sessions_are_created_for_known_systems_only() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(service(dir.path(), 0.0, ManualClock::new())));
    let (status, systems) = call(&app, "GET", "/systems", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(systems, json!(["rule", "untrained"]));

    let (status, body) = call(&app, "POST", "/sessions", Some(json!({ "system_id": "rule" }))).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["session_id"].as_str().unwrap();
    let (_, session) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(session["system_id"], "rule");
    assert_eq!(session["status"], "open");
    let goal: Goal = serde_json::from_value(session["goal"].clone()).unwrap();
    assert_eq!(body["goal_text"], goal.instructions());
    assert!(common::lab().goals().contains(&goal));

    assert_ne!(open(&app, "rule").await, open(&app, "rule").await);
    let (status, body) = call(&app, "POST", "/sessions", Some(json!({ "system_id": "sys-x" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("sys-x"));
    let (status, _) = say(&app, "nope", "hello").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn goodbye_closes_with_the_closing_template() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(service(dir.path(), 0.0, ManualClock::new())));
    let id = open(&app, "rule").await;
    let (status, body) = say(&app, &id, "   ").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    let (status, body) = say(&app, &id, "thank you , goodbye").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "reply": "thank you for using our service , goodbye .", "done": true }));
    let (status, _) = say(&app, &id, "hello again").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, session) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(session["status"], "finished");
    assert_eq!(session["transcript"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn the_eleventh_message_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(service(dir.path(), 0.0, ManualClock::new())));
    let id = open(&app, "rule").await;
    for i in 1..=10 {
        let (status, body) = say(&app, &id, "hmm").await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["done"], i == 10, "message {i}");
    }
    let (status, _) = say(&app, &id, "hmm").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, session) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(session["outcome"], "failure");
    assert_eq!(session["transcript"].as_array().unwrap().len(), 20);
}

/// Plays back fixed utterances and leaves after the last one.
struct Scripted {
    lines: Vec<String>,
    next: usize,
}

impl UserSimulator for Scripted {
    fn kind(&self) -> SimKind {
        SimKind::AgenT
    }

    fn reset(&mut self, _: &Goal, _: &mut SimRng) {
        self.next = 0;
    }

    fn respond(&mut self, _: Option<(&SystemAct, &str)>, _: &mut SimRng) -> Result<UserTurn> {
        let utterance = self.lines[self.next].clone();
        self.next += 1;
        Ok(UserTurn {
            utterance,
            act: None,
            done: self.next == self.lines.len(),
        })
    }
}

const SCRIPT: [&str; 5] = [
    "i want a cheap restaurant in the centre",
    "italian food please",
    "what is the phone number ?",
    "book a table for 2 people on monday at 12:00",
    "thank you , goodbye",
];

#[tokio::test]
async fn five_message_exchange_matches_an_offline_episode() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(service(dir.path(), 0.0, ManualClock::new())));
    let id = open(&app, "rule").await;
    for line in SCRIPT {
        let (status, _) = say(&app, &id, line).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, session) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    let session: Session = serde_json::from_value(session).unwrap();
    assert_eq!(session.status, SessionStatus::Finished);

    // A goal nothing can satisfy keeps the offline run going until the user leaves.
    let mut goal = session.goal.clone();
    goal.constraints = [(Slot::Name, "nowhere at all".to_string())].into();
    let mut user = Scripted {
        lines: SCRIPT.map(String::from).to_vec(),
        next: 0,
    };
    let core = &common::lab().core;
    let ep = run_episode(&mut user, core, &RulePolicy, &goal, &mut seeded(session.seed), &EpisodeConfig::default());
    assert_eq!(ep.dialog.turns.len(), 10);
    assert_eq!(session.transcript, ep.dialog.turns);
}

/// Feeds the stored user messages back through the pipeline.
fn replay(session: &Session, policy: &dyn SystemPolicy, noise: f64) -> Vec<String> {
    let core = common::lab().core.clone().with_nlu_noise(noise);
    let mut rng = seeded(session.seed);
    let mut state = DialogState::default();
    let mut out = Vec::new();
    for t in session.transcript.iter().filter(|t| t.speaker == Speaker::User) {
        let (_, next) = core.understand(&state, &t.utterance, &mut rng);
        state = next;
        let kind = policy.choose(&state, &t.utterance, &mask(&state), &mut rng);
        out.push(core.respond(kind, &mut state, &session.goal.id).unwrap().1);
    }
    out
}

const CHAT: [&str; 4] = [
    "i am looking for an expensive place in the north",
    "chinese food",
    "what is the address ?",
    "can i book it for 3 people on friday at 19:30",
];

#[tokio::test]
async fn interleaved_sessions_equal_serial_ones_and_replay_exactly() {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let serial = Arc::new(service(da.path(), 0.3, ManualClock::new()));
    let interleaved = Arc::new(service(db.path(), 0.3, ManualClock::new()));
    let (sa, sb) = (router(serial.clone()), router(interleaved.clone()));

    let ids_a = [open(&sa, "untrained").await, open(&sa, "rule").await];
    let ids_b = [open(&sb, "untrained").await, open(&sb, "rule").await];
    for id in &ids_a {
        for line in CHAT.iter().chain(["goodbye"].iter()) {
            say(&sa, id, line).await;
        }
    }
    for line in CHAT.iter().chain(["goodbye"].iter()) {
        for id in ids_b.iter().rev() {
            say(&sb, id, line).await;
        }
    }

    let lab = common::lab();
    let untrained = RlAgent::new(lab.featurizer(), None, &mut seeded(0));
    for (a, b) in ids_a.iter().zip(&ids_b) {
        let (x, y) = (serial.session(a).unwrap(), interleaved.session(b).unwrap());
        assert_eq!(x.transcript, y.transcript);
        assert_eq!(x.seed, y.seed);
        assert_eq!(x.status, SessionStatus::Finished);

        let stored = Store::open(da.path()).unwrap().load(a).unwrap();
        assert_eq!(stored, x);
        let policy: &dyn SystemPolicy = if x.system_id == "rule" { &RulePolicy } else { &untrained };
        let system: Vec<String> = x
            .transcript
            .iter()
            .filter(|t| t.speaker == Speaker::System)
            .map(|t| t.utterance.clone())
            .collect();
        assert_eq!(replay(&stored, policy, 0.3), system);
    }
}

#[tokio::test]
async fn surveys_are_validated_stored_once_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(service(dir.path(), 0.0, ManualClock::new())));
    let a = open(&app, "rule").await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{a}/survey"), Some(survey(1.0, 4))).await;
    assert_eq!(status, StatusCode::CONFLICT, "open sessions take no survey");
    say(&app, &a, "goodbye").await;
    let (status, body) = call(&app, "POST", &format!("/sessions/{a}/survey"), Some(survey(0.7, 4))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("solved"));
    let (status, _) = call(&app, "POST", &format!("/sessions/{a}/survey"), Some(survey(1.0, 6))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "POST", &format!("/sessions/{a}/survey"), Some(survey(1.0, 4))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &format!("/sessions/{a}/survey"), Some(survey(0.0, 1))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let b = open(&app, "rule").await;
    say(&app, &b, "goodbye").await;
    let (_, stored) = call(&app, "POST", &format!("/sessions/{b}/survey"), Some(survey(0.5, 2))).await;
    assert_eq!(stored["solved"], 0.5);

    let (status, report) = call(&app, "GET", "/reports/surveys", None).await;
    assert_eq!(status, StatusCode::OK);
    let rule = &report["systems"]["rule"];
    assert_eq!(rule["surveys"], 2);
    assert_eq!(rule["solved"]["mean"], 0.75);
    assert_eq!(rule["satisfaction"]["mean"], 3.0);
    assert_eq!(report["systems"]["untrained"]["surveys"], 0);

    // everything survives a restart
    let again = service(dir.path(), 0.0, ManualClock::new());
    assert_eq!(serde_json::to_value(again.report()).unwrap(), report);
    assert!(matches!(
        again.post_survey(&a, SurveyResult::try_from(SurveyForm { solved: 1.0, satisfaction: 1, efficiency: 1, naturalness: 1, rule_likeness: 1 }).unwrap()),
        Err(usersim::Error::DuplicateSurvey(_))
    ));
    let leftovers: Vec<_> = walk(dir.path()).into_iter().filter(|p| p.contains(".tmp")).collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
    assert!(dir.path().join("surveys").join(format!("{a}.json")).exists());
    assert_eq!(Store::open(dir.path()).unwrap().index().len(), 2);
}

fn walk(dir: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    out
}

fn summary(solved: Solved, likert: u8) -> SessionSummary {
    SessionSummary {
        system_id: "rule".into(),
        abandoned: false,
        outcome: Outcome::Success,
        survey: Some(SurveyResult {
            solved,
            satisfaction: likert,
            efficiency: 3,
            naturalness: 3,
            rule_likeness: 3,
        }),
    }
}

#[test]
fn twenty_survey_interval_by_hand() {
    let solved = [[Solved::Yes; 12].as_slice(), &[Solved::Partially; 5], &[Solved::No; 3]].concat();
    let likert = [5, 4, 4, 3, 5, 2, 4, 4, 3, 5, 1, 4, 3, 4, 5, 2, 3, 4, 4, 5];
    let rows: Vec<SessionSummary> = solved.iter().zip(likert).map(|(s, l)| summary(*s, l)).collect();
    let report = aggregate(&["rule".to_string()], &rows);
    let rule = &report["rule"];
    // solved: mean 14.5/20, squared deviations 2.7375, so 1.96 * sqrt(2.7375/19) / sqrt(20)
    let s = rule.solved.unwrap();
    assert!((s.mean - 0.725).abs() < 1e-12);
    assert!((s.ci95.unwrap() - 0.166357).abs() < 1e-6);
    // satisfaction: mean 74/20, squared deviations 24.2
    let t = rule.satisfaction.unwrap();
    assert!((t.mean - 3.7).abs() < 1e-12);
    assert!((t.ci95.unwrap() - 0.494620).abs() < 1e-6);
    let e = rule.efficiency.unwrap();
    assert_eq!((e.mean, e.ci95), (3.0, Some(0.0)));
    assert_eq!(rule.auto_success, Some(1.0));
}

#[tokio::test]
async fn idle_sessions_are_abandoned_and_left_out_of_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new();
    let svc = Arc::new(service(dir.path(), 0.0, clock.clone()));
    let app = router(svc.clone());
    let swept = open(&app, "rule").await;
    let lazy = open(&app, "rule").await;
    let finished = open(&app, "rule").await;
    say(&app, &swept, "i want chinese food").await;
    say(&app, &lazy, "i want chinese food").await;
    clock.advance(29);
    say(&app, &finished, "goodbye").await;
    assert_eq!(svc.sweep().unwrap(), 0);
    clock.advance(1);
    let (status, _) = say(&app, &lazy, "in the north").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(svc.sweep().unwrap(), 1);
    assert_eq!(svc.sweep().unwrap(), 0);
    for id in [&swept, &lazy] {
        assert_eq!(svc.session(id).unwrap().status, SessionStatus::Abandoned);
        assert_eq!(svc.session(id).unwrap().closed, Some(clock.now()));
    }
    let (status, _) = call(&app, "POST", &format!("/sessions/{swept}/survey"), Some(survey(0.0, 1))).await;
    assert_eq!(status, StatusCode::OK);

    let (_, report) = call(&app, "GET", "/reports/surveys", None).await;
    let rule = &report["systems"]["rule"];
    assert_eq!(rule["sessions"], 3);
    assert_eq!(rule["abandoned"], 2);
    assert_eq!(rule["surveys"], 0);
    assert_eq!(rule["auto_success"], 0.0);
}
