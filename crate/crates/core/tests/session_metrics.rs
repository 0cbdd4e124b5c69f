use logex_core::exercise::{fixed_set, ExerciseKind};
use logex_core::policy::FeedbackPolicy;
use logex_core::session::{completion_ratio, error_count, parse_log, write_log, Session, Submitted};
use logex_core::state::ChainDirection;
use logex_core::strategy::{solve_normal_form, NormalForm};
use logex_core::Formula;

const MINUTE: u64 = 60_000;

fn worked_texts() -> Vec<String> {
    let ex = &fixed_set(ExerciseKind::ToDnf)[0];
    let logex_core::exercise::Payload::Start { formula } = &ex.payload else {
        unreachable!()
    };
    solve_normal_form(formula, NormalForm::Dnf)
        .steps
        .iter()
        .map(|s| s.after().to_string())
        .collect()
}

fn step(text: &str) -> Submitted {
    Submitted {
        formula_text: text.into(),
        rule_id: None,
        direction: ChainDirection::Forward,
    }
}

/// A session on the first DNF exercise submitting `texts` two minutes
/// apart.
fn fixture(texts: &[String]) -> Session {
    let ex = &fixed_set(ExerciseKind::ToDnf)[0];
    let policy = FeedbackPolicy::default();
    let mut s = Session::new("fixture", Some("student".into()), 0);
    s.start(ex, 0).unwrap();
    for (i, t) in texts.iter().enumerate() {
        s.submit(&ex.id, (i as u64 + 1) * 2 * MINUTE, step(t), &policy).unwrap();
    }
    s
}

fn only(s: &Session) -> logex_core::session::ExerciseMetrics {
    let m = s.metrics();
    assert_eq!(m.exercises.len(), 1);
    m.exercises[0].clone()
}

#[test]
fn three_and_four_step_endings_score_one() {
    let texts = worked_texts();
    assert_eq!(texts.len(), 4);
    assert_eq!(texts[2], "(q /\\ ~r) \\/ q \\/ r");

    let three = fixture(&texts[..3]);
    let m = only(&three);
    assert!(m.completed);
    assert_eq!(m.accepted, 3);
    assert_eq!(m.efficiency, Some(1.0));

    let four = fixture(&texts);
    let m = only(&four);
    assert_eq!(m.accepted, 4);
    assert_eq!(m.efficiency, Some(1.0));
}

#[test]
fn redundant_steps_raise_efficiency_above_one() {
    let texts = worked_texts();
    let mut six = vec![
        "~(q -> r) \\/ ~~q \\/ r".to_string(),
        "~(q -> r) \\/ q \\/ r".to_string(),
    ];
    six.extend(texts);
    let m = only(&fixture(&six));
    assert_eq!(m.accepted, 6);
    assert_eq!(m.efficiency, Some(1.5));
}

#[test]
fn time_per_correct_step_in_minutes() {
    let texts = worked_texts();
    let m = only(&fixture(&texts[..3]));
    assert_eq!(m.time_per_correct_step, Some(2.0));
    assert!(!m.time_partial);
    let open = only(&fixture(&texts[..2]));
    assert!(open.time_partial);
    assert_eq!(open.time_per_correct_step, Some(2.0));
    assert!(open.efficiency.is_none());
}

#[test]
fn zero_elapsed_time() {
    let ex = &fixed_set(ExerciseKind::ToDnf)[0];
    let mut s = Session::new("z", None, 0);
    s.start(ex, 0).unwrap();
    s.submit(&ex.id, 0, step(&worked_texts()[0]), &FeedbackPolicy::default()).unwrap();
    assert_eq!(only(&s).time_per_correct_step, Some(0.0));
}

#[test]
fn error_fraction_counts_rejections_per_correct_step() {
    let texts = worked_texts();
    let ex = &fixed_set(ExerciseKind::ToDnf)[0];
    let policy = FeedbackPolicy::default();
    let mut s = fixture(&texts[..2]);
    let t = 10 * MINUTE;
    assert!(!s.submit(&ex.id, t, step("q /\\ (r"), &policy).unwrap().diagnosis.accepted);
    assert!(!s.submit(&ex.id, t, step("q"), &policy).unwrap().diagnosis.accepted);
    for txt in &texts[2..] {
        s.submit(&ex.id, t, step(txt), &policy).unwrap();
    }
    let m = only(&s);
    assert_eq!((m.errors, m.accepted), (2, 4));
    assert_eq!(m.error_fraction, Some(0.5));

    let mut none = Session::new("n", None, 0);
    none.start(ex, 0).unwrap();
    none.submit(&ex.id, 1, step("q"), &policy).unwrap();
    assert_eq!(only(&none).error_fraction, None);
    assert_eq!(only(&fixture(&texts)).error_fraction, Some(0.0));
}

#[test]
fn completion_ratio_and_error_count() {
    let texts = worked_texts();
    let half = fixture(&texts[..2]);
    assert_eq!(completion_ratio(half.exercises.values()), Some(0.5));
    let full = fixture(&texts);
    assert_eq!(completion_ratio(full.exercises.values()), Some(1.0));
    let idle = fixture(&[]);
    assert_eq!(completion_ratio(idle.exercises.values()), Some(0.0));
    assert_eq!(error_count(idle.exercises.values()), 0);
    assert_eq!(completion_ratio(std::iter::empty()), None);
    let set = &full.metrics().sets[0];
    assert_eq!(set.kind, ExerciseKind::ToDnf);
    assert_eq!(set.completion_ratio, Some(1.0));
}

#[test]
fn no_op_steps_change_no_metric() {
    let texts = worked_texts();
    for n in [2, 4] {
        let plain = fixture(&texts[..n]);
        let mut with_noop = fixture(&texts[..n]);
        let ex = &fixed_set(ExerciseKind::ToDnf)[0];
        let head = with_noop.progress(&ex.id).unwrap().state.head(ChainDirection::Forward).unwrap().clone();
        let noisy = match &head {
            Formula::Or(ops) if ops.len() > 2 => format!("({} \\/ {}) \\/ {}", ops[0], ops[1], Formula::or(ops[2..].to_vec())),
            other => format!("({other})"),
        };
        let out = with_noop
            .submit(&ex.id, 60 * MINUTE, step(&noisy), &FeedbackPolicy::default())
            .unwrap();
        assert_eq!(out.diagnosis.verdict.kind(), "no-op");
        assert_eq!(plain.metrics(), with_noop.metrics());
    }
}

#[test]
fn metrics_survive_log_round_trip() {
    let s = fixture(&worked_texts());
    let text = write_log(&s.log);
    let back = Session::replay(&parse_log(&text).unwrap()).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.metrics(), s.metrics());
    assert_eq!(write_log(&back.log), text);
}
