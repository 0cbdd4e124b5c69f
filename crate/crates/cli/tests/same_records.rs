use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use logex_cli::{check_record, CheckArgs};
use logex_core::diagnose::DiagnosisRecord;
use logex_core::policy::FeedbackPolicy;
use logex_core::state::ChainDirection;
use logex_service::{router, ApiConfig, Tutor};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(if body.is_null() { String::new() } else { body.to_string() }))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert!(res.status().is_success(), "{uri}: {}", res.status());
    serde_json::from_slice(&res.into_body().collect().await.unwrap().to_bytes()).unwrap()
}

// (start, submitted text, claimed rule)
const CASES: &[(&str, &str, Option<&str>)] = &[
    ("~(p\\/q)\\/(~~p/\\~q)\\/~q", "(~p\\/~q)\\/(~~p/\\~q)\\/~q", None),
    ("(p \\/ q) /\\ (~p \\/ ~q)", "F", None),
    ("~(p /\\ q /\\ r)", "~p \\/ ~q \\/ ~r", Some("demorgan")),
    ("(psi \\/ chi) /\\ phi", "(psi /\\ phi) \\/ (chi /\\ phi)", Some("distribution")),
    ("(psi \\/ chi) /\\ phi", "(phi /\\ psi) \\/ (phi /\\ chi)", Some("distribution")),
    ("q \\/ (~p \\/ q) \\/ p", "q \\/ ~p \\/ q \\/ p", None),
    ("p -> q", "~p \\/ q", Some("distribution")),
    ("p -> q", "~p \\/", None),
    ("(p /\\ q) \\/ (q /\\ p)", "p /\\ q", None),
    ("p -> q", "~q -> ~p", None),
];

#[tokio::test]
async fn cli_and_service_agree() {
    for (policy, name) in [(FeedbackPolicy::pilot(), "pilot"), (FeedbackPolicy::enhanced(), "enhanced")] {
        let tutor = Tutor::open(&ApiConfig {
            policy,
            ..ApiConfig::default()
        })
        .unwrap();
        let app = router(Arc::new(tutor));
        let s = call(&app, "POST", "/session", json!({}))
            .await["session"]
            .as_str()
            .unwrap()
            .to_string();
        for (kind, strict) in [("to-dnf", false), ("proof", true)] {
            for (i, (start, text, rule)) in CASES.iter().enumerate() {
                let id = format!("case-{kind}-{i}");
                let formulas = if kind == "proof" { json!([start, start]) } else { json!([start]) };
                call(&app, "POST", "/exercises", json!({"session": s, "kind": kind, "formulas": formulas, "id": id}))
                    .await;
                call(&app, "GET", &format!("/session/{s}/exercise/{id}"), Value::Null).await;
                let mut body = json!({"formulaText": text});
                if let Some(r) = rule {
                    body["ruleId"] = json!(r);
                }
                let v = call(&app, "POST", &format!("/session/{s}/exercise/{id}/step"), body).await;
                let mut served: DiagnosisRecord = serde_json::from_value(v["diagnosis"].clone()).unwrap();
                let cli = check_record(&CheckArgs {
                    before: start.to_string(),
                    after: text.to_string(),
                    rule: rule.map(String::from),
                    strict,
                    direction: ChainDirection::Forward,
                    policy,
                })
                .unwrap();
                if name == "pilot" {
                    assert!(served.advisories.is_empty());
                }
                // advisories depend on the exercise, which `check` does not know
                served.advisories.clear();
                assert_eq!(served, cli, "{name} {kind} {start} -> {text}");
            }
        }
    }
}
