//! Exercise progress: derivation chains for normal-form exercises and
//! two-sided chains for equivalence proofs.

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::rules::RuleApplication;
use crate::strategy::NormalForm;

/// Which chain of a proof a step extends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainDirection {
    #[default]
    Forward,
    Backward,
}

/// One accepted step of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Step {
    Rule(RuleApplication),
    /// Equivalent rewrite accepted without a recognized rule (lenient mode).
    Unrecognized { before: Formula, after: Formula },
}

impl Step {
    pub fn before(&self) -> &Formula {
        match self {
            Step::Rule(app) => &app.before,
            Step::Unrecognized { before, .. } => before,
        }
    }

    pub fn after(&self) -> &Formula {
        match self {
            Step::Rule(app) => &app.after,
            Step::Unrecognized { after, .. } => after,
        }
    }

    pub fn rule_id(&self) -> Option<&str> {
        match self {
            Step::Rule(app) => Some(&app.rule_id),
            Step::Unrecognized { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("nothing to undo on the {0:?} chain")]
    EmptyChain(ChainDirection),
    #[error("step starts from {found}, but the chain head is {head}")]
    NotChained { head: Formula, found: Formula },
    #[error("normal-form exercises have no backward chain")]
    NoBackwardChain,
}

fn head_of<'a>(start: &'a Formula, steps: &'a [Step]) -> &'a Formula {
    steps.last().map(Step::after).unwrap_or(start)
}

fn push_chained(start: &Formula, steps: &mut Vec<Step>, step: Step) -> Result<(), StateError> {
    let head = head_of(start, steps);
    if step.before() != head {
        return Err(StateError::NotChained {
            head: head.clone(),
            found: step.before().clone(),
        });
    }
    steps.push(step);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationState {
    pub goal: NormalForm,
    pub start: Formula,
    pub steps: Vec<Step>,
}

impl DerivationState {
    pub fn new(goal: NormalForm, start: Formula) -> Self {
        DerivationState {
            goal,
            start,
            steps: Vec::new(),
        }
    }

    pub fn head(&self) -> &Formula {
        head_of(&self.start, &self.steps)
    }

    pub fn push(&mut self, step: Step) -> Result<(), StateError> {
        push_chained(&self.start, &mut self.steps, step)
    }

    pub fn undo(&mut self) -> Result<Step, StateError> {
        self.steps
            .pop()
            .ok_or(StateError::EmptyChain(ChainDirection::Forward))
    }

    /// The head is in the goal normal form.
    pub fn is_complete(&self) -> bool {
        self.goal.holds(self.head())
    }

    /// The head is in the goal normal form and admits no simplification.
    pub fn is_finished(&self) -> bool {
        crate::strategy::is_finished(self.head(), self.goal)
    }
}

/// A forward chain growing down from `lhs` and a backward chain growing up
/// from `rhs`; closed once the two heads coincide.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofState {
    pub lhs: Formula,
    pub rhs: Formula,
    pub forward: Vec<Step>,
    pub backward: Vec<Step>,
}

impl ProofState {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        ProofState {
            lhs,
            rhs,
            forward: Vec::new(),
            backward: Vec::new(),
        }
    }

    pub fn forward_head(&self) -> &Formula {
        head_of(&self.lhs, &self.forward)
    }

    pub fn backward_head(&self) -> &Formula {
        head_of(&self.rhs, &self.backward)
    }

    pub fn head(&self, dir: ChainDirection) -> &Formula {
        match dir {
            ChainDirection::Forward => self.forward_head(),
            ChainDirection::Backward => self.backward_head(),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.forward_head() == self.backward_head()
    }

    pub fn push(&mut self, dir: ChainDirection, step: Step) -> Result<(), StateError> {
        match dir {
            ChainDirection::Forward => push_chained(&self.lhs, &mut self.forward, step),
            ChainDirection::Backward => push_chained(&self.rhs, &mut self.backward, step),
        }
    }

    pub fn undo(&mut self, dir: ChainDirection) -> Result<Step, StateError> {
        let chain = match dir {
            ChainDirection::Forward => &mut self.forward,
            ChainDirection::Backward => &mut self.backward,
        };
        chain.pop().ok_or(StateError::EmptyChain(dir))
    }

    pub fn len(&self) -> usize {
        self.forward.len() + self.backward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// State of any exercise kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExerciseState {
    Derivation(DerivationState),
    Proof(ProofState),
}

impl ExerciseState {
    pub fn head(&self, dir: ChainDirection) -> Result<&Formula, StateError> {
        match (self, dir) {
            (ExerciseState::Derivation(d), ChainDirection::Forward) => Ok(d.head()),
            (ExerciseState::Derivation(_), ChainDirection::Backward) => {
                Err(StateError::NoBackwardChain)
            }
            (ExerciseState::Proof(p), dir) => Ok(p.head(dir)),
        }
    }

    pub fn push(&mut self, dir: ChainDirection, step: Step) -> Result<(), StateError> {
        match self {
            ExerciseState::Derivation(d) if dir == ChainDirection::Forward => d.push(step),
            ExerciseState::Derivation(_) => Err(StateError::NoBackwardChain),
            ExerciseState::Proof(p) => p.push(dir, step),
        }
    }

    pub fn undo(&mut self, dir: ChainDirection) -> Result<Step, StateError> {
        match self {
            ExerciseState::Derivation(d) if dir == ChainDirection::Forward => d.undo(),
            ExerciseState::Derivation(_) => Err(StateError::NoBackwardChain),
            ExerciseState::Proof(p) => p.undo(dir),
        }
    }

    /// Accepted steps on all chains.
    pub fn step_count(&self) -> usize {
        match self {
            ExerciseState::Derivation(d) => d.steps.len(),
            ExerciseState::Proof(p) => p.len(),
        }
    }

    /// The exercise counts as solved: a normal form is reached, or the
    /// proof is closed.
    pub fn is_complete(&self) -> bool {
        match self {
            ExerciseState::Derivation(d) => d.is_complete(),
            ExerciseState::Proof(p) => p.is_closed(),
        }
    }

    /// Solved, and the strategy has nothing left to simplify.
    pub fn is_finished(&self) -> bool {
        match self {
            ExerciseState::Derivation(d) => d.is_finished(),
            ExerciseState::Proof(p) => p.is_closed(),
        }
    }

    pub fn all_steps(&self) -> impl Iterator<Item = &Step> {
        let (a, b): (&[Step], &[Step]) = match self {
            ExerciseState::Derivation(d) => (&d.steps, &[]),
            ExerciseState::Proof(p) => (&p.forward, &p.backward),
        };
        a.iter().chain(b.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn unrec(a: &str, b: &str) -> Step {
        Step::Unrecognized {
            before: p(a),
            after: p(b),
        }
    }

    #[test]
    fn undo_pops_the_named_chain_only() {
        let mut st = ProofState::new(p("p"), p("~~~~p"));
        st.push(ChainDirection::Backward, unrec("~~~~p", "~~p")).unwrap();
        st.push(ChainDirection::Backward, unrec("~~p", "p")).unwrap();
        assert!(st.is_closed());
        st.undo(ChainDirection::Backward).unwrap();
        assert_eq!(st.backward.len(), 1);
        assert_eq!(
            st.undo(ChainDirection::Forward),
            Err(StateError::EmptyChain(ChainDirection::Forward))
        );
    }

    #[test]
    fn steps_must_chain() {
        let mut d = DerivationState::new(NormalForm::Dnf, p("~~p"));
        assert!(matches!(
            d.push(unrec("q", "p")),
            Err(StateError::NotChained { .. })
        ));
        d.push(unrec("~~p", "p")).unwrap();
        assert_eq!(d.head(), &p("p"));
    }
}
