//! Hints, next steps, worked-out solutions, and strategy-path checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnose::{Advisory, AdvisoryKind};
use crate::formula::{equivalent, Formula, Position};
use crate::policy::FeedbackPolicy;
use crate::rules::{rule_by_id, standard_rules, RuleApplication, RuleDirection};
use crate::state::{ChainDirection, ExerciseState, Step};
use crate::strategy::{
    expansion_pending, is_canonical_rule, is_simplification_rule, phase, solve_normal_form, solve_proof,
    strategy_step, NormalForm, Phase, ProofError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedError {
    #[error("the exercise is already solved")]
    AlreadySolved,
    #[error("hint level must be 1, 2 or 3, not {0}")]
    BadLevel(u8),
    #[error("the target formula is not equivalent to the start formula")]
    NotEquivalent,
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// A suggested step and the chain it extends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NextStep {
    pub direction: ChainDirection,
    pub application: RuleApplication,
}

/// One row of a worked-out solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionStep {
    pub direction: ChainDirection,
    pub rule_id: String,
    pub rule_direction: RuleDirection,
    pub position: Position,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hint {
    pub level: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<NextStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<SolutionStep>>,
}

/// The strategy's next step from the current heads. For proofs this is the
/// first step of a fresh proof between the two heads.
pub fn next_step(state: &ExerciseState) -> Result<NextStep, FeedError> {
    if state.is_finished() {
        return Err(FeedError::AlreadySolved);
    }
    match state {
        ExerciseState::Derivation(d) => strategy_step(d.head(), d.goal)
            .map(|application| NextStep {
                direction: ChainDirection::Forward,
                application,
            })
            .ok_or(FeedError::AlreadySolved),
        ExerciseState::Proof(p) => {
            let proof = solve_proof(p.forward_head(), p.backward_head())?;
            let (direction, step) = match (proof.forward.first(), proof.backward.first()) {
                (Some(s), _) => (ChainDirection::Forward, s),
                (None, Some(s)) => (ChainDirection::Backward, s),
                (None, None) => return Err(FeedError::AlreadySolved),
            };
            match step {
                Step::Rule(application) => Ok(NextStep {
                    direction,
                    application: application.clone(),
                }),
                Step::Unrecognized { .. } => Err(FeedError::AlreadySolved),
            }
        }
    }
}

fn solution_rows(steps: &[Step], direction: ChainDirection) -> Vec<SolutionStep> {
    steps
        .iter()
        .filter_map(|s| match s {
            Step::Rule(a) => Some(SolutionStep {
                direction,
                rule_id: a.rule_id.clone(),
                rule_direction: a.direction,
                position: a.position.clone(),
                formula: a.after.clone(),
            }),
            Step::Unrecognized { .. } => None,
        })
        .collect()
}

/// Worked-out solution from the exercise's original start.
pub fn worked_solution(state: &ExerciseState) -> Result<Vec<SolutionStep>, FeedError> {
    match state {
        ExerciseState::Derivation(d) => Ok(solution_rows(
            &solve_normal_form(&d.start, d.goal).steps,
            ChainDirection::Forward,
        )),
        ExerciseState::Proof(p) => {
            let proof = solve_proof(&p.lhs, &p.rhs)?;
            let mut rows = solution_rows(&proof.forward, ChainDirection::Forward);
            rows.extend(solution_rows(&proof.backward, ChainDirection::Backward));
            Ok(rows)
        }
    }
}

fn hint_text(state: &ExerciseState, step: &NextStep) -> String {
    let name = rule_by_id(&step.application.rule_id).map_or("a rule", |r| r.name);
    let reverse = match step.application.direction {
        RuleDirection::LeftToRight => "",
        RuleDirection::RightToLeft => " from right to left",
    };
    match (state, step.direction) {
        (ExerciseState::Derivation(_), _) => format!("apply {name}{reverse}"),
        (ExerciseState::Proof(_), ChainDirection::Forward) => {
            format!("perform a forward step: apply {name}{reverse}")
        }
        (ExerciseState::Proof(_), ChainDirection::Backward) => {
            format!("perform a backward step: apply {name}{reverse}")
        }
    }
}

/// Level 1 names the rule (and chain) of the next step, level 2 gives the
/// step, level 3 the whole worked-out solution.
pub fn hint(state: &ExerciseState, level: u8) -> Result<Hint, FeedError> {
    let blank = Hint {
        level,
        text: None,
        step: None,
        solution: None,
    };
    match level {
        1 => {
            let step = next_step(state)?;
            Ok(Hint {
                text: Some(hint_text(state, &step)),
                ..blank
            })
        }
        2 => Ok(Hint {
            step: Some(next_step(state)?),
            ..blank
        }),
        3 => Ok(Hint {
            solution: Some(worked_solution(state)?),
            ..blank
        }),
        n => Err(FeedError::BadLevel(n)),
    }
}

/// Steps of the worked-out solution up to the first formula equal to
/// `target`; the full length when `target` is equivalent but never reached.
pub fn worked_solution_length(start: &Formula, nf: NormalForm, target: &Formula) -> Result<usize, FeedError> {
    let d = solve_normal_form(start, nf);
    if start.structurally_equal(target) {
        return Ok(0);
    }
    if let Some(i) = d.steps.iter().position(|s| s.after().structurally_equal(target)) {
        return Ok(i + 1);
    }
    if equivalent(start, target).unwrap_or(false) {
        Ok(d.steps.len())
    } else {
        Err(FeedError::NotEquivalent)
    }
}

/// Length of the worked-out solution of the whole exercise.
pub fn full_worked_length(state: &ExerciseState) -> Result<usize, FeedError> {
    match state {
        ExerciseState::Derivation(d) => Ok(solve_normal_form(&d.start, d.goal).steps.len()),
        ExerciseState::Proof(p) => Ok(solve_proof(&p.lhs, &p.rhs)?.len()),
    }
}

fn phase_allows(ph: Phase, id: &str, nf: NormalForm) -> bool {
    match ph {
        Phase::Equivalence => id == "equiv-def" || id == "equiv-def-cnf",
        Phase::Implication => id == "impl-def",
        Phase::Negation => matches!(id, "demorgan-and" | "demorgan-or" | "double-negation"),
        Phase::Distribution => id == nf.distribution_rule(),
        Phase::Simplification | Phase::Done => false,
    }
}

/// Whether the strategy relation contains `app` as a step from its
/// `before` state.
pub fn step_on_path(app: &RuleApplication, nf: NormalForm, proof: bool) -> bool {
    let id = app.rule_id.as_str();
    let dir = app.direction;
    if id == "comm-and" || id == "comm-or" {
        return true;
    }
    if proof && is_canonical_rule(id, dir) {
        let ph = phase(&app.before, nf);
        if expansion_pending(&app.before) || ph == Phase::Done {
            return true;
        }
    }
    if dir != RuleDirection::LeftToRight {
        return false;
    }
    is_simplification_rule(id) || phase_allows(phase(&app.before, nf), id, nf)
}

/// Every accepted step so far lies on some path of the strategy.
pub fn on_path(state: &ExerciseState) -> bool {
    let (nf, proof) = match state {
        ExerciseState::Derivation(d) => (d.goal, false),
        ExerciseState::Proof(_) => (NormalForm::Dnf, true),
    };
    state.all_steps().all(|s| match s {
        Step::Rule(app) => step_on_path(app, nf, proof),
        Step::Unrecognized { .. } => false,
    })
}

/// First position where absorption applies, if any.
pub fn absorption_position(f: &Formula) -> Option<Position> {
    let rules: Vec<_> = standard_rules()
        .iter()
        .filter(|r| r.family == "absorption")
        .collect();
    let none = Default::default();
    f.positions().into_iter().find(|pos| {
        rules.iter().any(|r| {
            r.variants.iter().any(|v| {
                v.rewrite_all(RuleDirection::LeftToRight, f, pos, &none)
                    .is_ok_and(|rs| !rs.is_empty())
            })
        })
    })
}

/// Advisories for the state reached by a step that produced `after` using
/// `step_rule` (absent for unrecognized steps).
pub fn advisories_for(
    after: &Formula,
    step_rule: Option<&str>,
    state: &ExerciseState,
    policy: &FeedbackPolicy,
) -> Vec<Advisory> {
    let mut out = Vec::new();
    if policy.advisories {
        let was_absorption = step_rule.is_some_and(|id| id.starts_with("absorption"));
        if !was_absorption {
            if let Some(position) = absorption_position(after) {
                out.push(Advisory {
                    kind: AdvisoryKind::AbsorptionAvailable,
                    message: "this formula can be simplified using absorption".into(),
                    position: Some(position),
                });
            }
        }
        if let Ok(worked) = full_worked_length(state) {
            if state.step_count() > worked {
                out.push(Advisory {
                    kind: AdvisoryKind::SolutionLongerThanWorked,
                    message: format!(
                        "your solution now has {} steps, more than the {worked} of the worked-out solution",
                        state.step_count()
                    ),
                    position: None,
                });
            }
        }
    }
    if policy.divergence_warnings && !on_path(state) {
        out.push(Advisory {
            kind: AdvisoryKind::DivergedFromStrategy,
            message: "your solution has left the paths of the strategy; a hint will start from the current formula".into(),
            position: None,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::state::{DerivationState, ProofState};

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn derivation(s: &str, nf: NormalForm) -> ExerciseState {
        ExerciseState::Derivation(DerivationState::new(nf, p(s)))
    }

    #[test]
    fn level_two_pushes_negation() {
        let h = hint(&derivation("~(p /\\ q)", NormalForm::Dnf), 2).unwrap();
        let step = h.step.unwrap();
        assert_eq!(step.application.rule_id, "demorgan-and");
        assert_eq!(step.application.after, p("~p \\/ ~q"));
        assert!(hint(&derivation("p", NormalForm::Dnf), 4).is_err());
    }

    #[test]
    fn backward_hint_on_proofs() {
        let st = ExerciseState::Proof(ProofState::new(p("p \\/ ~q"), p("q -> p")));
        let h = hint(&st, 1).unwrap();
        let text = h.text.unwrap();
        assert!(text.contains("backward"), "{text}");
        assert!(text.contains("Implication"), "{text}");
    }

    #[test]
    fn worked_length_to_simplification_level() {
        let start = p("~(q -> r) \\/ q \\/ r");
        let nf = NormalForm::Dnf;
        assert_eq!(worked_solution_length(&start, nf, &p("(q /\\ ~r) \\/ q \\/ r")).unwrap(), 3);
        assert_eq!(worked_solution_length(&start, nf, &p("q \\/ r")).unwrap(), 4);
        assert_eq!(worked_solution_length(&start, nf, &p("r \\/ q")).unwrap(), 4);
        assert!(worked_solution_length(&start, nf, &p("q")).is_err());
    }

    #[test]
    fn level_three_matches_the_worked_length() {
        let st = derivation("~(q -> r) \\/ q \\/ r", NormalForm::Dnf);
        let sol = hint(&st, 3).unwrap().solution.unwrap();
        assert_eq!(sol.len(), full_worked_length(&st).unwrap());
        assert_eq!(sol.last().unwrap().formula, p("q \\/ r"));
    }

    #[test]
    fn absorption_advisory_after_distribution_state() {
        let after = p("(q /\\ ~r) \\/ q \\/ r");
        assert_eq!(absorption_position(&after), Some(Position::span(vec![], 0, 2)));
        let st = derivation("~(q -> r) \\/ q \\/ r", NormalForm::Dnf);
        let adv = advisories_for(&after, Some("demorgan-or"), &st, &FeedbackPolicy::enhanced());
        assert!(adv.iter().any(|a| a.kind == AdvisoryKind::AbsorptionAvailable));
        let adv = advisories_for(&after, Some("absorption-or"), &st, &FeedbackPolicy::enhanced());
        assert!(adv.iter().all(|a| a.kind != AdvisoryKind::AbsorptionAvailable));
        assert!(advisories_for(&after, None, &st, &FeedbackPolicy::pilot()).is_empty());
    }

    #[test]
    fn off_path_steps_are_detected() {
        let mut st = derivation("p -> q", NormalForm::Dnf);
        let app = crate::rules::rule_by_id("double-negation")
            .unwrap()
            .apply(0, RuleDirection::RightToLeft, &p("p -> q"), &Position::at(vec![1]))
            .unwrap();
        assert_eq!(app, p("p -> ~~q"));
        assert!(on_path(&st));
        st.push(
            ChainDirection::Forward,
            Step::Rule(RuleApplication {
                rule_id: "double-negation".into(),
                variant: 0,
                direction: RuleDirection::RightToLeft,
                position: Position::at(vec![1]),
                before: p("p -> q"),
                after: app,
            }),
        )
        .unwrap();
        assert!(!on_path(&st));
        let adv = advisories_for(&p("p -> ~~q"), Some("double-negation"), &st, &FeedbackPolicy::enhanced());
        assert!(adv.iter().any(|a| a.kind == AdvisoryKind::DivergedFromStrategy));
        // a hint still works from the diverged state
        assert_eq!(next_step(&st).unwrap().application.before, p("p -> ~~q"));
    }
}
