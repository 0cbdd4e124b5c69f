//! HTTP service for the tutor: sessions, exercises, step diagnosis and feed
//! forward over JSON, with every state change appended to an event log.

pub mod config;
mod error;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use logex_core::diagnose::DiagnosisRecord;
use logex_core::exercise::{
    content_hash, create_user_exercise, fixed_content_hash, fixed_exercises, load_exercises, validate_set,
    Exercise, ExerciseKind,
};
use logex_core::feedforward::{Hint, NextStep, SolutionStep};
use logex_core::policy::FeedbackPolicy;
use logex_core::rules::{rule_sheet, RuleSheetEntry};
use logex_core::session::{parse_log, split_sessions, EventBody, LogEvent, MetricsReport, Session, SessionError, Submitted};
use logex_core::state::{ChainDirection, ExerciseState, Step};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use config::{policy_from_toml, ApiConfig, ConfigError};
pub use error::ApiError;

/// Milliseconds since the epoch.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    })
}

#[derive(Default)]
struct Registry {
    order: Vec<String>,
    by_id: BTreeMap<String, Exercise>,
}

impl Registry {
    fn insert(&mut self, ex: Exercise) -> bool {
        if self.by_id.contains_key(&ex.id) {
            return false;
        }
        self.order.push(ex.id.clone());
        self.by_id.insert(ex.id.clone(), ex);
        true
    }

    fn list(&self) -> Vec<Exercise> {
        self.order.iter().map(|id| self.by_id[id].clone()).collect()
    }
}

/// Shared service state. Requests on one session are serialized by its
/// lock; distinct sessions proceed in parallel.
pub struct Tutor {
    policy: FeedbackPolicy,
    content_hash: String,
    exercises: RwLock<Registry>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    sink: Option<Mutex<File>>,
    clock: Clock,
    next_session: AtomicU64,
    next_exercise: AtomicU64,
}

impl Tutor {
    /// Loads the exercises and replays the event log named by `config`.
    pub fn open(config: &ApiConfig) -> Result<Self, ConfigError> {
        let (exercises, hash) = match &config.exercises {
            Some(path) => {
                let text = config::read(path)?;
                let set = load_exercises(&text)?;
                validate_set(&set)?;
                (set, content_hash(&text))
            }
            None => (fixed_exercises(), fixed_content_hash()),
        };
        let mut registry = Registry::default();
        for ex in exercises {
            registry.insert(ex);
        }
        let mut sessions = HashMap::new();
        let sink = match &config.log {
            Some(path) => {
                if path.exists() {
                    let text = config::read(path)?;
                    let events = parse_log(&text).map_err(|(line, e)| ConfigError::Log {
                        line,
                        message: e.to_string(),
                    })?;
                    for (id, evs) in split_sessions(&events) {
                        for ev in &evs {
                            if let EventBody::ExerciseCreated { exercise } = &ev.body {
                                registry.insert(exercise.clone());
                            }
                        }
                        let s = Session::replay(&evs).map_err(|source| ConfigError::Replay {
                            session: id.clone(),
                            source,
                        })?;
                        sessions.insert(id, Arc::new(Mutex::new(s)));
                    }
                }
                let file = std::fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|source| ConfigError::Io {
                        path: path.clone(),
                        source,
                    })?;
                Some(Mutex::new(file))
            }
            None => None,
        };
        Ok(Tutor {
            policy: config.policy,
            content_hash: hash,
            exercises: RwLock::new(registry),
            sessions: RwLock::new(sessions),
            sink,
            clock: system_clock(),
            next_session: AtomicU64::new(1),
            next_exercise: AtomicU64::new(1),
        })
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn policy(&self) -> FeedbackPolicy {
        self.policy
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }

    fn exercise(&self, id: &str) -> Option<Exercise> {
        self.exercises.read().unwrap().by_id.get(id).cloned()
    }

    /// A session's events so far.
    pub fn log_of(&self, session: &str) -> Option<Vec<LogEvent>> {
        let s = self.sessions.read().unwrap().get(session).cloned()?;
        let log = s.lock().unwrap().log.clone();
        Some(log)
    }

    fn append(&self, events: &[LogEvent]) -> Result<(), ApiError> {
        let Some(sink) = &self.sink else {
            return Ok(());
        };
        if events.is_empty() {
            return Ok(());
        }
        let text = logex_core::session::write_log(events);
        let mut file = sink.lock().unwrap();
        file.write_all(text.as_bytes())
            .and_then(|()| file.flush())
            .map_err(|e| ApiError::internal(format!("log write failed: {e}")))
    }

    /// Runs `f` on the session at the current time and appends whatever it
    /// logged. Timestamps never run backwards within a session.
    fn commit<T>(
        &self,
        session: &mut Session,
        f: impl FnOnce(&mut Session, u64) -> Result<T, SessionError>,
    ) -> Result<T, ApiError> {
        let last = session.log.last().map_or(0, |e| e.ts);
        let ts = (self.clock)().max(last);
        let before = session.log.len();
        let out = f(session, ts);
        self.append(&session.log[before..])?;
        Ok(out?)
    }

    // The exercise must be under way in the session: unknown ids are 404,
    // known but unstarted ones are a conflict.
    fn started(&self, session: &Session, exercise: &str) -> Result<(), ApiError> {
        if session.exercises.contains_key(exercise) {
            Ok(())
        } else if self.exercise(exercise).is_some() {
            Err(ApiError::conflict(format!("exercise `{exercise}` has not been started")))
        } else {
            Err(ApiError::not_found(format!("unknown exercise `{exercise}`")))
        }
    }

    fn create_session(&self, student: Option<String>) -> Result<String, ApiError> {
        let mut sessions = self.sessions.write().unwrap();
        let id = loop {
            let id = format!("s{}", self.next_session.fetch_add(1, Ordering::Relaxed));
            if !sessions.contains_key(&id) {
                break id;
            }
        };
        let s = Session::new(id.clone(), student, (self.clock)());
        self.append(&s.log)?;
        sessions.insert(id.clone(), Arc::new(Mutex::new(s)));
        Ok(id)
    }

    fn create_exercise(&self, req: NewExercise) -> Result<Exercise, ApiError> {
        let session = self.session(&req.session)?;
        let mut session = session.lock().unwrap();
        let texts: Vec<&str> = req.formulas.iter().map(String::as_str).collect();
        let mut registry = self.exercises.write().unwrap();
        let id = match req.id {
            Some(id) if registry.by_id.contains_key(&id) => {
                return Err(ApiError::conflict(format!("exercise `{id}` already exists")))
            }
            Some(id) if id.trim().is_empty() => return Err(ApiError::bad_request("id: must not be empty")),
            Some(id) => id,
            None => loop {
                let id = format!("user-{}", self.next_exercise.fetch_add(1, Ordering::Relaxed));
                if !registry.by_id.contains_key(&id) {
                    break id;
                }
            },
        };
        let ex = create_user_exercise(id, req.kind, &texts)?;
        self.commit(&mut session, |s, ts| s.created(&ex, ts))?;
        registry.insert(ex.clone());
        Ok(ex)
    }

    fn view(session: &Session, exercise: &str) -> Result<ExerciseView, ApiError> {
        let p = session.progress(exercise)?;
        Ok(ExerciseView {
            session: session.id.clone(),
            exercise: p.exercise.clone(),
            state: p.state.clone(),
            complete: p.state.is_complete(),
            finished: p.state.is_finished(),
            accepted: p.accepted,
            errors: p.errors,
            completed_at: p.completed_at,
        })
    }
}

/// Body of `POST /session`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    #[serde(default)]
    pub student: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: String,
}

/// Body of `POST /exercises`: one formula for normal-form exercises, two
/// for proofs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewExercise {
    pub session: String,
    pub kind: ExerciseKind,
    pub formulas: Vec<String>,
    #[serde(default)]
    pub id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExerciseList {
    pub content_hash: String,
    pub exercises: Vec<Exercise>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExerciseView {
    pub session: String,
    pub exercise: Exercise,
    pub state: ExerciseState,
    /// A normal form is reached or the proof is closed.
    pub complete: bool,
    /// Complete with nothing left to simplify.
    pub finished: bool,
    pub accepted: usize,
    pub errors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completed_at: Option<u64>,
}

/// Body of `POST …/step`.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StepRequest {
    pub formula_text: String,
    #[serde(default)]
    pub rule_id: Option<String>,
    #[serde(default)]
    pub direction: ChainDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepResponse {
    pub diagnosis: DiagnosisRecord,
    /// This step completed the exercise.
    pub completed: bool,
    pub exercise: ExerciseView,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UndoRequest {
    #[serde(default)]
    pub direction: ChainDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndoResponse {
    pub undone: Step,
    pub exercise: ExerciseView,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HintRequest {
    pub level: u8,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub steps: Vec<SolutionStep>,
}

// An empty body reads as `{}`; parse errors name the offending field.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        bytes
    };
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

type Shared = State<Arc<Tutor>>;

async fn create_session(State(t): Shared, bytes: Bytes) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let req: NewSession = body(&bytes)?;
    let session = t.create_session(req.student)?;
    Ok((StatusCode::CREATED, Json(SessionCreated { session })))
}

async fn list_exercises(State(t): Shared) -> Json<ExerciseList> {
    Json(ExerciseList {
        content_hash: t.content_hash.clone(),
        exercises: t.exercises.read().unwrap().list(),
    })
}

async fn create_exercise(State(t): Shared, bytes: Bytes) -> Result<(StatusCode, Json<Exercise>), ApiError> {
    let req: NewExercise = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(t.create_exercise(req)?)))
}

async fn rules() -> Json<Vec<RuleSheetEntry>> {
    Json(rule_sheet())
}

async fn exercise_state(State(t): Shared, Path((s, e)): Path<(String, String)>) -> Result<Json<ExerciseView>, ApiError> {
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    if !session.exercises.contains_key(&e) {
        let ex = t
            .exercise(&e)
            .ok_or_else(|| ApiError::not_found(format!("unknown exercise `{e}`")))?;
        t.commit(&mut session, |s, ts| s.start(&ex, ts))?;
    }
    Ok(Json(Tutor::view(&session, &e)?))
}

async fn submit_step(
    State(t): Shared,
    Path((s, e)): Path<(String, String)>,
    bytes: Bytes,
) -> Result<Json<StepResponse>, ApiError> {
    let req: StepRequest = body(&bytes)?;
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    t.started(&session, &e)?;
    let sub = Submitted {
        formula_text: req.formula_text,
        rule_id: req.rule_id,
        direction: req.direction,
    };
    let policy = t.policy;
    let out = t.commit(&mut session, |s, ts| s.submit(&e, ts, sub, &policy))?;
    Ok(Json(StepResponse {
        diagnosis: out.diagnosis.record(),
        completed: out.completed,
        exercise: Tutor::view(&session, &e)?,
    }))
}

async fn undo(
    State(t): Shared,
    Path((s, e)): Path<(String, String)>,
    bytes: Bytes,
) -> Result<Json<UndoResponse>, ApiError> {
    let req: UndoRequest = body(&bytes)?;
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    t.started(&session, &e)?;
    let undone = t.commit(&mut session, |s, ts| s.undo(&e, ts, req.direction))?;
    Ok(Json(UndoResponse {
        undone,
        exercise: Tutor::view(&session, &e)?,
    }))
}

async fn hint(State(t): Shared, Path((s, e)): Path<(String, String)>, bytes: Bytes) -> Result<Json<Hint>, ApiError> {
    let req: HintRequest = body(&bytes)?;
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    t.started(&session, &e)?;
    Ok(Json(t.commit(&mut session, |s, ts| s.request_hint(&e, ts, req.level))?))
}

async fn next(State(t): Shared, Path((s, e)): Path<(String, String)>, bytes: Bytes) -> Result<Json<NextStep>, ApiError> {
    let Empty {} = body(&bytes)?;
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    t.started(&session, &e)?;
    Ok(Json(t.commit(&mut session, |s, ts| s.request_next(&e, ts))?))
}

async fn solution(State(t): Shared, Path((s, e)): Path<(String, String)>) -> Result<Json<Solution>, ApiError> {
    let session = t.session(&s)?;
    let mut session = session.lock().unwrap();
    t.started(&session, &e)?;
    let steps = t.commit(&mut session, |s, ts| s.request_solution(&e, ts))?;
    Ok(Json(Solution { steps }))
}

async fn metrics(State(t): Shared, Path(s): Path<String>) -> Result<Json<MetricsReport>, ApiError> {
    let session = t.session(&s)?;
    let report = session.lock().unwrap().metrics();
    Ok(Json(report))
}

/// All routes over a shared tutor.
pub fn router(tutor: Arc<Tutor>) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/exercises", get(list_exercises).post(create_exercise))
        .route("/rules", get(rules))
        .route("/session/{s}/exercise/{e}", get(exercise_state))
        .route("/session/{s}/exercise/{e}/step", post(submit_step))
        .route("/session/{s}/exercise/{e}/undo", post(undo))
        .route("/session/{s}/exercise/{e}/hint", post(hint))
        .route("/session/{s}/exercise/{e}/next", post(next))
        .route("/session/{s}/exercise/{e}/solution", get(solution))
        .route("/session/{s}/metrics", get(metrics))
        .with_state(tutor)
}
