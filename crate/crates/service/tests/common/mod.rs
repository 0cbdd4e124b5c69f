#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use logex_core::corpus;
use logex_core::exercise::{create_user_exercise, fixed_exercises, ExerciseKind, Payload};
use logex_core::policy::FeedbackPolicy;
use logex_core::rules::buggy_rules;
use logex_core::rules::pattern::Bindings;
use logex_core::Formula;
use logex_service::{router, ApiConfig, Tutor};
use serde_json::{json, Value};
use tower::ServiceExt;

pub struct Api {
    pub app: Router,
    pub tutor: Arc<Tutor>,
}

/// A clock advancing one second per reading.
pub fn ticking_clock() -> logex_service::Clock {
    let t = Arc::new(AtomicU64::new(1_000_000));
    Arc::new(move || t.fetch_add(1_000, Ordering::Relaxed))
}

impl Api {
    pub fn with_config(config: &ApiConfig) -> Self {
        let tutor = Arc::new(Tutor::open(config).unwrap().with_clock(ticking_clock()));
        Api {
            app: router(tutor.clone()),
            tutor,
        }
    }

    pub fn new(policy: FeedbackPolicy) -> Self {
        Self::with_config(&ApiConfig {
            policy,
            ..ApiConfig::default()
        })
    }

    pub async fn raw(&self, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    pub async fn call(&self, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
        let text = if body.is_null() { String::new() } else { body.to_string() };
        self.raw(method, uri, &text).await
    }

    pub async fn ok(&self, method: &str, uri: &str, body: Value) -> Value {
        let (status, v) = self.call(method, uri, body).await;
        assert!(status.is_success(), "{method} {uri}: {status} {v}");
        v
    }

    pub async fn session(&self) -> String {
        let v = self.ok("POST", "/session", json!({"student": "anna"})).await;
        v["session"].as_str().unwrap().to_string()
    }

    /// Creates a user exercise in `s` and starts it.
    pub async fn exercise(&self, s: &str, kind: &str, formulas: &[&str]) -> String {
        let v = self
            .ok("POST", "/exercises", json!({"session": s, "kind": kind, "formulas": formulas}))
            .await;
        let id = v["id"].as_str().unwrap().to_string();
        self.ok("GET", &format!("/session/{s}/exercise/{id}"), Value::Null).await;
        id
    }

    pub async fn step(&self, s: &str, e: &str, text: &str, rule: Option<&str>, dir: &str) -> Value {
        let mut body = json!({"formulaText": text, "direction": dir});
        if let Some(r) = rule {
            body["ruleId"] = json!(r);
        }
        self.ok("POST", &format!("/session/{s}/exercise/{e}/step"), body).await
    }

    pub fn log_len(&self, s: &str) -> usize {
        self.tutor.log_of(s).unwrap().len()
    }

    pub fn kinds(&self, s: &str) -> Vec<&'static str> {
        self.tutor.log_of(s).unwrap().iter().map(|e| e.body.kind()).collect()
    }
}

/// Kinds whose verdict comes from rule recognition or the semantic check,
/// not from equivalent-step feedback.
pub const RULE_DECIDED: [&str; 6] = ["correct", "wrong-rule-name", "no-op", "syntax-error", "buggy", "not-equivalent"];

#[derive(Debug, Default)]
pub struct Matrix {
    pub compared: usize,
    pub recognized: usize,
    pub advisory_only: usize,
    pub equivalent_feedback: usize,
    pub violations: Vec<String>,
}

// Every buggy-rule rewrite of `f` at a node position.
fn buggy_rewrites(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for pos in f.positions() {
        if pos.span.is_some() {
            continue;
        }
        let Ok(target) = f.subformula_at(&pos) else { continue };
        for b in buggy_rules() {
            for m in b.lhs().matches(&target, &Bindings::new()) {
                if let Some(g) = b.rhs().instantiate(&m) {
                    if let Ok(after) = f.replace_at(&pos, g) {
                        out.push(after);
                    }
                }
            }
        }
    }
    out
}

fn submissions(start: &Formula, seed: u64) -> Vec<(String, Option<String>)> {
    let mut rng = corpus::rng(seed);
    let mut out = Vec::new();
    for app in corpus::applications(start, &Formula::atom("p")) {
        let text = app.after.to_string();
        out.push((text.clone(), None));
        out.push((text.clone(), Some(app.rule_id.clone())));
        out.push((text, Some("absorption".to_string())));
    }
    for after in buggy_rewrites(start) {
        out.push((after.to_string(), None));
    }
    for _ in 0..4 {
        out.push((corpus::perturb(&mut rng, start, 3, 40).to_string(), None));
        out.push((corpus::formula(&mut rng, &corpus::Shape::SMALL).to_string(), None));
    }
    out.push((format!("({start}"), None));
    out.push((format!("{start}"), None));
    out
}

async fn submit(api: &Api, s: &str, e: &str, text: &str, rule: Option<&str>, dir: &str) -> Value {
    let v = api.step(s, e, text, rule, dir).await;
    let d = &v["diagnosis"];
    if d["accepted"] == true && d["kind"] != "no-op" {
        api.ok(
            "POST",
            &format!("/session/{s}/exercise/{e}/undo"),
            serde_json::json!({ "direction": dir }),
        )
        .await;
    }
    d.clone()
}

/// Sends identical submissions to a pilot and an enhanced instance and
/// checks that they differ only in advisories and equivalent-step feedback.
pub async fn flag_matrix() -> Matrix {
    let pilot = Api::new(FeedbackPolicy::pilot());
    let enhanced = Api::new(FeedbackPolicy::enhanced());
    let (sp, se) = (pilot.session().await, enhanced.session().await);
    let mut exercises = fixed_exercises();
    for (i, b) in buggy_rules().iter().enumerate() {
        let (lhs, _) = b.witness_instance();
        let id = format!("bug-{i}");
        let body = serde_json::json!({"session": sp, "kind": "to-dnf", "formulas": [lhs.to_string()], "id": id});
        if pilot.call("POST", "/exercises", body.clone()).await.0.is_success() {
            let mut body = body;
            body["session"] = serde_json::json!(se);
            enhanced.ok("POST", "/exercises", body).await;
            exercises.push(create_user_exercise(&id, ExerciseKind::ToDnf, &[&lhs.to_string()]).unwrap());
        }
    }
    let mut m = Matrix::default();
    for (n, ex) in exercises.iter().enumerate() {
        for (api, s) in [(&pilot, &sp), (&enhanced, &se)] {
            api.ok("GET", &format!("/session/{s}/exercise/{}", ex.id), Value::Null).await;
        }
        let sides: Vec<(&Formula, &str)> = match &ex.payload {
            Payload::Start { formula } => vec![(formula, "forward")],
            Payload::Proof { lhs, rhs } => vec![(lhs, "forward"), (rhs, "backward")],
        };
        for (start, dir) in sides {
            for (text, rule) in submissions(start, n as u64) {
                let a = submit(&pilot, &sp, &ex.id, &text, rule.as_deref(), dir).await;
                let b = submit(&enhanced, &se, &ex.id, &text, rule.as_deref(), dir).await;
                m.compared += 1;
                let what = format!("{} {dir} {text:?} {rule:?}: pilot {a} enhanced {b}", ex.id);
                if a["advisories"].as_array().is_some_and(|x| !x.is_empty()) {
                    m.violations.push(format!("pilot advisory on {what}"));
                }
                let kind = b["kind"].as_str().unwrap_or_default();
                if RULE_DECIDED.contains(&kind) {
                    m.recognized += 1;
                    let strip = |v: &Value| {
                        let mut v = v.clone();
                        v.as_object_mut().unwrap().remove("advisories");
                        v
                    };
                    if strip(&a) != strip(&b) {
                        m.violations.push(what);
                    } else if a != b {
                        m.advisory_only += 1;
                    }
                } else if kind == "buggy-but-equivalent" {
                    m.equivalent_feedback += 1;
                    if a["kind"] != "equivalent-unrecognized" {
                        m.violations.push(what);
                    }
                } else if a["kind"] != b["kind"] {
                    m.violations.push(what);
                }
            }
        }
    }
    m
}
