//! Per-student sessions driven by an append-only event log, and the
//! learning metrics computed from it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnose::{diagnose, Diagnosis, DiagnosisRecord, Mode, StepSubmission, Verdict};
use crate::exercise::{Exercise, ExerciseKind};
use crate::feedforward::{
    advisories_for, full_worked_length, hint, next_step, worked_solution, worked_solution_length, FeedError,
    Hint, NextStep, SolutionStep,
};
use crate::formula::equivalent;
use crate::policy::FeedbackPolicy;
use crate::state::{ChainDirection, ExerciseState, StateError, Step};

/// A submitted step as logged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Submitted {
    pub formula_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<String>,
    #[serde(default)]
    pub direction: ChainDirection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum EventBody {
    SessionCreated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        student: Option<String>,
    },
    ExerciseCreated {
        exercise: Exercise,
    },
    ExerciseStarted {
        exercise: Exercise,
    },
    StepSubmitted(Submitted),
    Diagnosis {
        record: DiagnosisRecord,
        direction: ChainDirection,
        /// The step added to the chain, present exactly when accepted and
        /// not a no-op.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<Step>,
    },
    HintRequested {
        level: u8,
    },
    NextStepRequested {},
    WorkedSolutionRequested {},
    Undo {
        direction: ChainDirection,
    },
    ExerciseCompleted {},
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionCreated { .. } => "session-created",
            EventBody::ExerciseCreated { .. } => "exercise-created",
            EventBody::ExerciseStarted { .. } => "exercise-started",
            EventBody::StepSubmitted(_) => "step-submitted",
            EventBody::Diagnosis { .. } => "diagnosis",
            EventBody::HintRequested { .. } => "hint-requested",
            EventBody::NextStepRequested {} => "next-step-requested",
            EventBody::WorkedSolutionRequested {} => "worked-solution-requested",
            EventBody::Undo { .. } => "undo",
            EventBody::ExerciseCompleted {} => "exercise-completed",
        }
    }
}

/// One line of the interaction log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEvent {
    /// Milliseconds since the epoch.
    pub ts: u64,
    pub session: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exercise: Option<String>,
    #[serde(flatten)]
    pub body: EventBody,
}

impl LogEvent {
    pub fn new(ts: u64, session: impl Into<String>, exercise: Option<&str>, body: EventBody) -> Self {
        LogEvent {
            ts,
            session: session.into(),
            exercise: exercise.map(String::from),
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("event belongs to session `{found}`, not `{expected}`")]
    WrongSession { expected: String, found: String },
    #[error("timestamp {ts} precedes the previous event at {last}")]
    OutOfOrder { ts: u64, last: u64 },
    #[error("a log must start with session-created")]
    NotCreated,
    #[error("session already created")]
    AlreadyCreated,
    #[error("a step submission must be followed by its diagnosis")]
    MissingDiagnosis,
    #[error("diagnosis without a preceding step submission")]
    UnexpectedDiagnosis,
    #[error("event needs an exercise id")]
    NoExercise,
    #[error("exercise `{0}` has not been started")]
    UnknownExercise(String),
    #[error("exercise `{0}` was already started")]
    AlreadyStarted(String),
    #[error("an accepted step must carry the applied step")]
    MissingStep,
    #[error("exercise `{0}` is not finished")]
    NotFinished(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Feed(#[from] FeedError),
}

/// Progress on one exercise within a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExerciseProgress {
    pub exercise: Exercise,
    pub state: ExerciseState,
    /// Accepted steps that were not no-ops, including later undone ones.
    pub accepted: usize,
    pub errors: usize,
    pub started_at: u64,
    /// Time of the latest event that is not part of a no-op submission.
    pub last_at: u64,
    pub completed_at: Option<u64>,
    /// Time of the latest accepted step.
    pub last_step_at: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub id: String,
    pub student: Option<String>,
    pub active: Option<String>,
    pub exercises: BTreeMap<String, ExerciseProgress>,
    pub log: Vec<LogEvent>,
    pending: Option<(String, Submitted)>,
}

/// Result of a diagnosed submission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub diagnosis: Diagnosis,
    pub completed: bool,
}

impl Session {
    pub fn new(id: impl Into<String>, student: Option<String>, ts: u64) -> Self {
        let id = id.into();
        let mut s = Session::empty(id.clone());
        s.record(LogEvent::new(ts, id, None, EventBody::SessionCreated { student }))
            .expect("first event of an empty session");
        s
    }

    fn empty(id: String) -> Self {
        Session {
            id,
            student: None,
            active: None,
            exercises: BTreeMap::new(),
            log: Vec::new(),
            pending: None,
        }
    }

    /// Rebuilds a session from its events.
    pub fn replay(events: &[LogEvent]) -> Result<Self, SessionError> {
        let first = events.first().ok_or(SessionError::NotCreated)?;
        let mut s = Session::empty(first.session.clone());
        for ev in events {
            s.record(ev.clone())?;
        }
        Ok(s)
    }

    pub fn progress(&self, exercise: &str) -> Result<&ExerciseProgress, SessionError> {
        self.exercises
            .get(exercise)
            .ok_or_else(|| SessionError::UnknownExercise(exercise.to_string()))
    }

    fn progress_mut(&mut self, exercise: Option<&str>) -> Result<&mut ExerciseProgress, SessionError> {
        let id = exercise.ok_or(SessionError::NoExercise)?;
        self.exercises
            .get_mut(id)
            .ok_or_else(|| SessionError::UnknownExercise(id.to_string()))
    }

    /// Applies one event; the session is unchanged when it is rejected.
    pub fn record(&mut self, ev: LogEvent) -> Result<(), SessionError> {
        let log = std::mem::take(&mut self.log);
        let mut next = self.clone();
        next.log = log;
        match next.apply(&ev) {
            Ok(()) => {
                next.log.push(ev);
                *self = next;
                Ok(())
            }
            Err(e) => {
                self.log = next.log;
                Err(e)
            }
        }
    }

    fn apply(&mut self, ev: &LogEvent) -> Result<(), SessionError> {
        if ev.session != self.id {
            return Err(SessionError::WrongSession {
                expected: self.id.clone(),
                found: ev.session.clone(),
            });
        }
        match (self.log.last(), &ev.body) {
            (None, EventBody::SessionCreated { .. }) => {}
            (None, _) => return Err(SessionError::NotCreated),
            (Some(_), EventBody::SessionCreated { .. }) => return Err(SessionError::AlreadyCreated),
            (Some(last), _) if ev.ts < last.ts => {
                return Err(SessionError::OutOfOrder {
                    ts: ev.ts,
                    last: last.ts,
                })
            }
            _ => {}
        }
        let is_diagnosis = matches!(ev.body, EventBody::Diagnosis { .. });
        if self.pending.is_some() && !is_diagnosis {
            return Err(SessionError::MissingDiagnosis);
        }
        if self.pending.is_none() && is_diagnosis {
            return Err(SessionError::UnexpectedDiagnosis);
        }
        let ex = ev.exercise.as_deref();
        // no-op submissions leave every metric unchanged, elapsed time included
        let counts = match &ev.body {
            EventBody::StepSubmitted(_) => false,
            EventBody::Diagnosis { record, .. } => record.kind != Verdict::NoOp.kind(),
            _ => true,
        };
        if let (Some(id), true) = (ex, counts) {
            if let Some(p) = self.exercises.get_mut(id) {
                p.last_at = ev.ts;
            }
        }
        match &ev.body {
            EventBody::SessionCreated { student } => self.student = student.clone(),
            EventBody::ExerciseCreated { .. } => {}
            EventBody::ExerciseStarted { exercise } => {
                let id = ex.unwrap_or(&exercise.id).to_string();
                if self.exercises.contains_key(&id) {
                    return Err(SessionError::AlreadyStarted(id));
                }
                self.exercises.insert(
                    id.clone(),
                    ExerciseProgress {
                        exercise: exercise.clone(),
                        state: exercise.initial_state(),
                        accepted: 0,
                        errors: 0,
                        started_at: ev.ts,
                        last_at: ev.ts,
                        completed_at: None,
                        last_step_at: None,
                    },
                );
                self.active = Some(id);
            }
            EventBody::StepSubmitted(sub) => {
                self.progress_mut(ex)?;
                self.pending = Some((ex.unwrap().to_string(), sub.clone()));
            }
            EventBody::Diagnosis {
                record,
                direction,
                step,
            } => {
                let (pending_ex, _) = self.pending.take().unwrap();
                if ex != Some(pending_ex.as_str()) {
                    return Err(SessionError::UnexpectedDiagnosis);
                }
                let p = self.progress_mut(ex)?;
                if !record.accepted {
                    p.errors += 1;
                } else if record.kind != Verdict::NoOp.kind() {
                    let step = step.clone().ok_or(SessionError::MissingStep)?;
                    p.state.push(*direction, step)?;
                    p.accepted += 1;
                    p.last_step_at = Some(ev.ts);
                }
            }
            EventBody::HintRequested { .. }
            | EventBody::NextStepRequested {}
            | EventBody::WorkedSolutionRequested {} => {
                self.progress_mut(ex)?;
            }
            EventBody::Undo { direction } => {
                self.progress_mut(ex)?.state.undo(*direction)?;
            }
            EventBody::ExerciseCompleted {} => {
                let p = self.progress_mut(ex)?;
                if !p.state.is_complete() {
                    return Err(SessionError::NotFinished(p.exercise.id.clone()));
                }
                p.completed_at.get_or_insert(ev.ts);
            }
        }
        Ok(())
    }

    /// Starts an exercise unless it is already under way.
    pub fn start(&mut self, exercise: &Exercise, ts: u64) -> Result<(), SessionError> {
        if self.exercises.contains_key(&exercise.id) {
            self.active = Some(exercise.id.clone());
            return Ok(());
        }
        let ev = LogEvent::new(
            ts,
            self.id.clone(),
            Some(&exercise.id),
            EventBody::ExerciseStarted {
                exercise: exercise.clone(),
            },
        );
        self.record(ev)
    }

    fn event(&self, ts: u64, exercise: &str, body: EventBody) -> LogEvent {
        LogEvent::new(ts, self.id.clone(), Some(exercise), body)
    }

    /// Diagnoses a step against the head of `direction`, records the
    /// submission and its diagnosis, and completes the exercise when the
    /// step first reaches a normal form or closes the proof. Later steps
    /// (further simplification) are still accepted.
    pub fn submit(
        &mut self,
        exercise: &str,
        ts: u64,
        sub: Submitted,
        policy: &FeedbackPolicy,
    ) -> Result<StepOutcome, SessionError> {
        let p = self.progress(exercise)?;
        let before = p.state.head(sub.direction)?.clone();
        let mode: Mode = policy.mode_for(p.exercise.kind);
        let mut diag = diagnose(&StepSubmission {
            before: before.clone(),
            after_text: sub.formula_text.clone(),
            claimed_rule: sub.rule_id.clone(),
            mode,
            direction: sub.direction,
        });
        diag = policy.apply(diag);
        let step = match (&diag.verdict, &diag.after) {
            _ if !diag.accepted => None,
            (Verdict::Correct(app), _) => Some(Step::Rule(app.clone())),
            (Verdict::NoOp, _) => None,
            (_, Some(after)) => Some(Step::Unrecognized {
                before,
                after: after.clone(),
            }),
            (_, None) => None,
        };
        if let (Some(step), Some(after)) = (&step, &diag.after) {
            let mut state = p.state.clone();
            state.push(sub.direction, step.clone())?;
            diag.advisories = advisories_for(after, step.rule_id(), &state, policy);
        }
        let direction = sub.direction;
        self.record(self.event(ts, exercise, EventBody::StepSubmitted(sub)))?;
        self.record(self.event(
            ts,
            exercise,
            EventBody::Diagnosis {
                record: diag.record(),
                direction,
                step,
            },
        ))?;
        let p = self.progress(exercise)?;
        let completed = p.completed_at.is_none() && p.state.is_complete() && diag.accepted;
        if completed {
            self.record(self.event(ts, exercise, EventBody::ExerciseCompleted {}))?;
        }
        Ok(StepOutcome { diagnosis: diag, completed })
    }

    pub fn undo(&mut self, exercise: &str, ts: u64, direction: ChainDirection) -> Result<Step, SessionError> {
        let popped = self.progress(exercise)?.state.clone().undo(direction)?;
        self.record(self.event(ts, exercise, EventBody::Undo { direction }))?;
        Ok(popped)
    }

    pub fn request_hint(&mut self, exercise: &str, ts: u64, level: u8) -> Result<Hint, SessionError> {
        let h = hint(&self.progress(exercise)?.state, level)?;
        self.record(self.event(ts, exercise, EventBody::HintRequested { level }))?;
        Ok(h)
    }

    pub fn request_next(&mut self, exercise: &str, ts: u64) -> Result<NextStep, SessionError> {
        let n = next_step(&self.progress(exercise)?.state)?;
        self.record(self.event(ts, exercise, EventBody::NextStepRequested {}))?;
        Ok(n)
    }

    pub fn request_solution(&mut self, exercise: &str, ts: u64) -> Result<Vec<SolutionStep>, SessionError> {
        let s = worked_solution(&self.progress(exercise)?.state)?;
        self.record(self.event(ts, exercise, EventBody::WorkedSolutionRequested {}))?;
        Ok(s)
    }

    /// Logs a user-entered exercise.
    pub fn created(&mut self, exercise: &Exercise, ts: u64) -> Result<(), SessionError> {
        let ev = LogEvent::new(
            ts,
            self.id.clone(),
            Some(&exercise.id),
            EventBody::ExerciseCreated {
                exercise: exercise.clone(),
            },
        );
        self.record(ev)
    }
}

/// Splits a multi-session log by session id, keeping event order.
pub fn split_sessions(events: &[LogEvent]) -> BTreeMap<String, Vec<LogEvent>> {
    let mut out: BTreeMap<String, Vec<LogEvent>> = BTreeMap::new();
    for ev in events {
        out.entry(ev.session.clone()).or_default().push(ev.clone());
    }
    out
}

/// Parses a newline-delimited log.
pub fn parse_log(text: &str) -> Result<Vec<LogEvent>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

pub fn write_log(events: &[LogEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("log events serialize") + "\n")
        .collect()
}

/// Accepted steps in the log that do not re-check as valid steps.
pub fn audit(events: &[LogEvent]) -> Vec<usize> {
    events
        .iter()
        .enumerate()
        .filter_map(|(i, ev)| match &ev.body {
            EventBody::Diagnosis { step: Some(step), .. } => {
                let ok = match step {
                    Step::Rule(app) => {
                        let d = diagnose(&StepSubmission {
                            before: app.before.clone(),
                            after_text: app.after.to_string(),
                            claimed_rule: Some(app.rule_id.clone()),
                            mode: Mode::Strict,
                            direction: ChainDirection::Forward,
                        });
                        matches!(d.verdict, Verdict::Correct(_))
                    }
                    Step::Unrecognized { before, after } => equivalent(before, after).unwrap_or(false),
                };
                (!ok).then_some(i)
            }
            _ => None,
        })
        .collect()
}

const MS_PER_MINUTE: f64 = 60_000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExerciseMetrics {
    pub exercise: String,
    pub kind: ExerciseKind,
    pub accepted: usize,
    pub errors: usize,
    pub completed: bool,
    /// Steps of the worked-out solution of the whole exercise.
    pub required: usize,
    pub error_fraction: Option<f64>,
    /// Minutes per accepted step.
    pub time_per_correct_step: Option<f64>,
    /// The exercise was not completed; time runs to the last event.
    pub time_partial: bool,
    pub efficiency: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SetMetrics {
    pub kind: ExerciseKind,
    pub exercises: usize,
    pub completion_ratio: Option<f64>,
    pub error_count: usize,
    /// Mean of the defined per-exercise efficiencies.
    pub efficiency: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub session: String,
    pub exercises: Vec<ExerciseMetrics>,
    pub sets: Vec<SetMetrics>,
}

pub fn error_fraction(p: &ExerciseProgress) -> Option<f64> {
    (p.accepted > 0).then(|| p.errors as f64 / p.accepted as f64)
}

/// Minutes per accepted step and whether the exercise is still open.
pub fn time_per_correct_step(p: &ExerciseProgress) -> Option<(f64, bool)> {
    if p.accepted == 0 {
        return None;
    }
    let end = match p.completed_at {
        Some(done) => done.max(p.last_step_at.unwrap_or(done)),
        None => p.last_at,
    };
    let minutes = end.saturating_sub(p.started_at) as f64 / MS_PER_MINUTE;
    Some((minutes / p.accepted as f64, p.completed_at.is_none()))
}

/// Accepted steps over the worked-out solution's steps to the student's
/// final formula; proofs use the whole worked proof. Defined for completed
/// exercises whose current state is still solved.
pub fn efficiency(p: &ExerciseProgress) -> Option<f64> {
    if p.completed_at.is_none() || !p.state.is_complete() {
        return None;
    }
    let worked = match &p.state {
        ExerciseState::Derivation(d) => worked_solution_length(&d.start, d.goal, d.head()).ok()?,
        proof => full_worked_length(proof).ok()?,
    };
    (worked > 0).then(|| p.accepted as f64 / worked as f64)
}

fn required(p: &ExerciseProgress) -> usize {
    full_worked_length(&p.exercise.initial_state()).unwrap_or(0)
}

/// Completed steps over required steps across a set: a completed exercise
/// counts all its required steps, an open one its accepted steps up to
/// that number.
pub fn completion_ratio<'a>(set: impl IntoIterator<Item = &'a ExerciseProgress>) -> Option<f64> {
    let (done, total) = set.into_iter().fold((0usize, 0usize), |(d, t), p| {
        let req = required(p);
        let got = if p.completed_at.is_some() { req } else { p.accepted.min(req) };
        (d + got, t + req)
    });
    (total > 0).then(|| done as f64 / total as f64)
}

pub fn error_count<'a>(set: impl IntoIterator<Item = &'a ExerciseProgress>) -> usize {
    set.into_iter().map(|p| p.errors).sum()
}

pub fn exercise_metrics(p: &ExerciseProgress) -> ExerciseMetrics {
    let time = time_per_correct_step(p);
    ExerciseMetrics {
        exercise: p.exercise.id.clone(),
        kind: p.exercise.kind,
        accepted: p.accepted,
        errors: p.errors,
        completed: p.completed_at.is_some(),
        required: required(p),
        error_fraction: error_fraction(p),
        time_per_correct_step: time.map(|t| t.0),
        time_partial: time.is_some_and(|t| t.1) || (time.is_none() && p.completed_at.is_none()),
        efficiency: efficiency(p),
    }
}

impl Session {
    pub fn metrics(&self) -> MetricsReport {
        let exercises: Vec<ExerciseMetrics> = self.exercises.values().map(exercise_metrics).collect();
        let sets = ExerciseKind::ALL
            .into_iter()
            .filter_map(|kind| {
                let set: Vec<&ExerciseProgress> =
                    self.exercises.values().filter(|p| p.exercise.kind == kind).collect();
                if set.is_empty() {
                    return None;
                }
                let effs: Vec<f64> = set.iter().filter_map(|p| efficiency(p)).collect();
                Some(SetMetrics {
                    kind,
                    exercises: set.len(),
                    completion_ratio: completion_ratio(set.iter().copied()),
                    error_count: error_count(set.iter().copied()),
                    efficiency: (!effs.is_empty()).then(|| effs.iter().sum::<f64>() / effs.len() as f64),
                })
            })
            .collect();
        MetricsReport {
            session: self.id.clone(),
            exercises,
            sets,
        }
    }
}
