use logex_core::corpus::{self, Shape};
use logex_core::diagnose::{diagnose, Mode, StepSubmission, Verdict};
use logex_core::feedforward::next_step;
use logex_core::rules::RuleApplication;
use logex_core::state::{ChainDirection, DerivationState, ExerciseState, ProofState, Step};
use logex_core::strategy::{measure, solve_normal_form, solve_proof, NormalForm};
use logex_core::{equivalent, Formula};
use proptest::prelude::*;

const CLOSURE_FACTOR: usize = 4;

fn rediagnoses(app: &RuleApplication) -> bool {
    let d = diagnose(&StepSubmission {
        before: app.before.clone(),
        after_text: app.after.to_string(),
        claimed_rule: Some(app.rule_id.clone()),
        mode: Mode::Strict,
        direction: ChainDirection::Forward,
    });
    matches!(d.verdict, Verdict::Correct(ref a) if a.rule_id == app.rule_id)
}

fn rule_steps(steps: &[Step]) -> Vec<&RuleApplication> {
    steps
        .iter()
        .map(|s| match s {
            Step::Rule(a) => a,
            Step::Unrecognized { .. } => panic!("solver emitted an unrecognized step"),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normal_form_solutions(seed in any::<u64>(), cnf in any::<bool>()) {
        let nf = if cnf { NormalForm::Cnf } else { NormalForm::Dnf };
        let f = corpus::formula(&mut corpus::rng(seed), &Shape::NORMAL_FORM);
        let d = solve_normal_form(&f, nf);
        prop_assert!(nf.holds(d.head()), "{f} ended in {}", d.head());
        prop_assert!(d.is_finished());
        prop_assert!(equivalent(&f, d.head()).unwrap());
        for app in rule_steps(&d.steps) {
            prop_assert!(measure(&app.after, nf) < measure(&app.before, nf), "{} did not decrease the measure on {}", app.rule_id, app.before);
            prop_assert!(rediagnoses(app), "{} {} -> {}", app.rule_id, app.before, app.after);
        }
    }

    #[test]
    fn next_step_closes_from_reachable_states(seed in any::<u64>(), cnf in any::<bool>(), detours in 0usize..3) {
        let nf = if cnf { NormalForm::Cnf } else { NormalForm::Dnf };
        let mut rng = corpus::rng(seed);
        let f = corpus::formula(&mut rng, &Shape::NORMAL_FORM);
        let mut st = ExerciseState::Derivation(DerivationState::new(nf, f.clone()));
        for _ in 0..detours {
            let head = st.head(ChainDirection::Forward).unwrap().clone();
            if let Some(a) = corpus::random_application(&mut rng, &head) {
                st.push(ChainDirection::Forward, Step::Rule(a)).unwrap();
            }
        }
        // detours may duplicate subformulas, so measure from where they end
        let worked = solve_normal_form(st.head(ChainDirection::Forward).unwrap(), nf).steps.len();
        let mut n = 0;
        while let Ok(s) = next_step(&st) {
            st.push(s.direction, Step::Rule(s.application)).unwrap();
            n += 1;
            prop_assert!(n <= CLOSURE_FACTOR * worked.max(1), "no closure from {f}");
        }
        prop_assert!(st.is_finished());
    }
}

fn proof_pair(seed: u64) -> (Formula, Formula) {
    let mut rng = corpus::rng(seed);
    let small = Shape { atoms: 3, depth: 3, ..Shape::NORMAL_FORM };
    let f = corpus::formula(&mut rng, &small);
    let g = corpus::perturb(&mut rng, &f, 3, 30);
    (f, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn proofs_close_with_recognized_steps(seed in any::<u64>()) {
        let (f, g) = proof_pair(seed);
        let p = solve_proof(&f, &g).unwrap();
        prop_assert!(p.is_closed());
        for app in rule_steps(&p.forward).into_iter().chain(rule_steps(&p.backward)) {
            prop_assert!(rediagnoses(app), "{} {} -> {}", app.rule_id, app.before, app.after);
        }
    }

    #[test]
    fn proof_hints_close_the_proof(seed in any::<u64>()) {
        let (f, g) = proof_pair(seed);
        let worked = solve_proof(&f, &g).unwrap().len();
        let mut st = ExerciseState::Proof(ProofState::new(f, g));
        let mut n = 0;
        while let Ok(s) = next_step(&st) {
            st.push(s.direction, Step::Rule(s.application)).unwrap();
            n += 1;
            prop_assert!(n <= CLOSURE_FACTOR * worked.max(1));
        }
        prop_assert!(st.is_finished());
    }
}
