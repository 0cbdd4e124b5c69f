use logex_core::corpus::{self, Shape};
use logex_core::diagnose::{diagnose, recognize, Mode, StepSubmission, Verdict};
use logex_core::state::ChainDirection;
use logex_core::{equivalent, parse, Formula};
use proptest::prelude::*;

fn submit(before: &Formula, after: &str, claim: Option<&str>, mode: Mode) -> logex_core::diagnose::Diagnosis {
    diagnose(&StepSubmission {
        before: before.clone(),
        after_text: after.to_string(),
        claimed_rule: claim.map(String::from),
        mode,
        direction: ChainDirection::Forward,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recognize_finds_the_applied_rule(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let f = corpus::formula(&mut rng, &Shape::NORMAL_FORM);
        if let Some(a) = corpus::random_application(&mut rng, &f) {
            let found = recognize(&a.before, &a.after);
            prop_assert!(found.iter().any(|r| r.rule_id == a.rule_id),
                "{} at {} on {}: {:?}", a.rule_id, a.position, a.before, found.iter().map(|r| &r.rule_id).collect::<Vec<_>>());
            let d = submit(&a.before, &a.after.to_string(), Some(&a.rule_id), Mode::Strict);
            prop_assert!(matches!(d.verdict, Verdict::Correct(_)));
        }
    }

    #[test]
    fn verdicts_agree_with_semantics(seed in any::<u64>(), strict in any::<bool>()) {
        let mut rng = corpus::rng(seed);
        let before = corpus::formula(&mut rng, &Shape::NORMAL_FORM);
        // a random step, a perturbed formula, or an unrelated formula
        let after = match seed % 3 {
            0 => corpus::random_application(&mut rng, &before).map_or(before.clone(), |a| a.after),
            1 => corpus::perturb(&mut rng, &before, 3, 60),
            _ => corpus::formula(&mut rng, &Shape::NORMAL_FORM),
        };
        let mode = if strict { Mode::Strict } else { Mode::Lenient };
        let d = submit(&before, &after.to_string(), None, mode);
        let same = equivalent(&before, &after).unwrap();
        match &d.verdict {
            Verdict::Correct(app) => prop_assert!(same && equivalent(&app.before, &app.after).unwrap()),
            Verdict::Buggy { .. } | Verdict::NotEquivalent => prop_assert!(!same),
            Verdict::BuggyButEquivalent { .. } | Verdict::EquivalentUnrecognized | Verdict::NoOp => prop_assert!(same),
            Verdict::WrongRuleName { .. } => prop_assert!(same),
            Verdict::SyntaxError(e) => prop_assert!(false, "printed formula failed to parse: {e}"),
        }
        if d.accepted {
            prop_assert!(same);
        }
        prop_assert_eq!(submit(&before, &after.to_string(), None, mode), d);
    }
}

#[test]
fn wrong_rule_names_are_reported() {
    let before = parse("~(p \\/ q)").unwrap();
    let d = submit(&before, "~p /\\ ~q", Some("distribution"), Mode::Strict);
    assert_eq!(
        d.verdict,
        Verdict::WrongRuleName {
            detected: Some("demorgan-or".into()),
            claimed: Some("distribution".into())
        }
    );
    assert!(!d.accepted);
    let d = submit(&before, "~p /\\ ~q", Some("DeMorgan"), Mode::Strict);
    assert!(d.accepted);
}

#[test]
fn unrecognized_equivalent_steps_depend_on_mode() {
    let before = parse("p -> q").unwrap();
    let strict = submit(&before, "~q -> ~p", None, Mode::Strict);
    assert_eq!(strict.verdict, Verdict::EquivalentUnrecognized);
    assert!(!strict.accepted);
    let lenient = submit(&before, "~q -> ~p", None, Mode::Lenient);
    assert!(lenient.accepted);
    assert_ne!(strict.message(), lenient.message());
}

#[test]
fn syntax_errors_point_at_the_problem() {
    let d = submit(&parse("p").unwrap(), "p /\\ (q", None, Mode::Lenient);
    let rec = d.record();
    assert_eq!(rec.kind, "syntax-error");
    assert!(rec.syntax.is_some());
    assert!(!rec.accepted);
}
