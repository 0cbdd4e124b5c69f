//! Steps and solutions discussed for the original tutor, reproduced exactly.

use logex_core::diagnose::{diagnose, Mode, StepSubmission, Verdict};
use logex_core::feedforward::worked_solution_length;
use logex_core::state::ChainDirection;
use logex_core::strategy::{solve_normal_form, NormalForm};
use logex_core::{parse, Formula};

fn p(s: &str) -> Formula {
    parse(s).unwrap()
}

fn check(before: &str, after: &str, mode: Mode) -> logex_core::diagnose::Diagnosis {
    diagnose(&StepSubmission {
        before: p(before),
        after_text: after.into(),
        claimed_rule: None,
        mode,
        direction: ChainDirection::Forward,
    })
}

#[test]
fn demorgan_keeping_the_disjunction_is_buggy() {
    let d = check(
        "~(p \\/ q) \\/ (~~p /\\ ~q) \\/ ~q",
        "(~p \\/ ~q) \\/ (~~p /\\ ~q) \\/ ~q",
        Mode::Lenient,
    );
    match d.verdict {
        Verdict::Buggy { message, .. } => {
            assert!(message.contains("a disjunction is transformed into a conjunction"))
        }
        other => panic!("{other:?}"),
    }
    assert!(!d.accepted);
}

#[test]
fn complement_of_a_compound_is_buggy() {
    let d = check("(p \\/ q) /\\ (~p \\/ ~q)", "F", Mode::Lenient);
    assert!(matches!(d.verdict, Verdict::Buggy { .. }), "{:?}", d.verdict);
}

#[test]
fn generalized_demorgan_is_one_step() {
    let d = check("~(p /\\ q /\\ r)", "~p \\/ ~q \\/ ~r", Mode::Lenient);
    assert!(matches!(d.verdict, Verdict::Correct(ref a) if a.rule_id == "demorgan-and"), "{:?}", d.verdict);
}

#[test]
fn distribution_from_the_right() {
    let named = |after: &str| {
        diagnose(&StepSubmission {
            before: p("(psi \\/ chi) /\\ phi"),
            after_text: after.into(),
            claimed_rule: Some("distribution".into()),
            mode: Mode::Strict,
            direction: ChainDirection::Forward,
        })
    };
    let ok = named("(psi /\\ phi) \\/ (chi /\\ phi)");
    assert!(matches!(ok.verdict, Verdict::Correct(_)), "{:?}", ok.verdict);
    let swapped = named("(phi /\\ psi) \\/ (phi /\\ chi)");
    assert!(!swapped.accepted, "{:?}", swapped.verdict);
}

#[test]
fn removing_parentheses_is_a_no_op() {
    let d = check("q \\/ (~p \\/ q) \\/ p", "q \\/ ~p \\/ q \\/ p", Mode::Strict);
    assert_eq!(d.verdict, Verdict::NoOp);
    assert!(d.accepted);
}

#[test]
fn three_and_four_step_endings() {
    let start = p("~(q -> r) \\/ q \\/ r");
    let d = solve_normal_form(&start, NormalForm::Dnf);
    assert_eq!(d.steps.len(), 4);
    assert_eq!(d.steps[2].after(), &p("(q /\\ ~r) \\/ q \\/ r"));
    assert_eq!(d.head(), &p("q \\/ r"));
    assert_eq!(worked_solution_length(&start, NormalForm::Dnf, &p("(q /\\ ~r) \\/ q \\/ r")).unwrap(), 3);
    assert_eq!(worked_solution_length(&start, NormalForm::Dnf, &p("q \\/ r")).unwrap(), 4);
}
