//! Feedback-policy flags of a tutor instance.

use serde::{Deserialize, Serialize};

use crate::diagnose::{AdvisoryKind, Diagnosis, Mode, Verdict};
use crate::exercise::ExerciseKind;

/// Which feedback services are switched on. Step correction itself is
/// always on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct FeedbackPolicy {
    /// Absorption and solution-length advisories.
    pub advisories: bool,
    pub divergence_warnings: bool,
    /// Specific buggy-rule feedback on steps that are still equivalent.
    pub equivalent_step_feedback: bool,
    pub proof_mode: Mode,
    pub normal_form_mode: Mode,
}

impl Default for FeedbackPolicy {
    fn default() -> Self {
        Self::enhanced()
    }
}

impl FeedbackPolicy {
    /// Step correction only.
    pub fn pilot() -> Self {
        FeedbackPolicy {
            advisories: false,
            divergence_warnings: false,
            equivalent_step_feedback: false,
            proof_mode: Mode::Strict,
            normal_form_mode: Mode::Lenient,
        }
    }

    /// Pilot configuration plus the proposed feedback additions.
    pub fn enhanced() -> Self {
        FeedbackPolicy {
            advisories: true,
            divergence_warnings: true,
            equivalent_step_feedback: true,
            ..Self::pilot()
        }
    }

    pub fn mode_for(&self, kind: ExerciseKind) -> Mode {
        match kind {
            ExerciseKind::Proof => self.proof_mode,
            ExerciseKind::ToDnf | ExerciseKind::ToCnf => self.normal_form_mode,
        }
    }

    /// Drops feedback the policy switches off; never changes whether a
    /// recognized rule step is accepted.
    pub fn apply(&self, mut diag: Diagnosis) -> Diagnosis {
        if !self.equivalent_step_feedback {
            if let Verdict::BuggyButEquivalent { .. } = diag.verdict {
                diag.verdict = Verdict::EquivalentUnrecognized;
                diag.accepted = diag.mode == Mode::Lenient;
            }
        }
        diag.advisories.retain(|a| match a.kind {
            AdvisoryKind::DivergedFromStrategy => self.divergence_warnings,
            AdvisoryKind::AbsorptionAvailable | AdvisoryKind::SolutionLongerThanWorked => {
                self.advisories
            }
        });
        diag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnose::{diagnose, StepSubmission};
    use crate::parse::parse;
    use crate::state::ChainDirection;

    #[test]
    fn default_is_enhanced() {
        assert_eq!(FeedbackPolicy::default(), FeedbackPolicy::enhanced());
        let p: FeedbackPolicy = serde_json::from_str(r#"{"advisories":false}"#).unwrap();
        assert!(!p.advisories && p.divergence_warnings);
        assert_eq!(p.proof_mode, Mode::Strict);
        let v = serde_json::to_value(FeedbackPolicy::pilot()).unwrap();
        assert_eq!(v["equivalentStepFeedback"], false);
        assert_eq!(v["normalFormMode"], "lenient");
    }

    #[test]
    fn pilot_hides_buggy_feedback_on_equivalent_steps() {
        let sub = StepSubmission {
            before: parse("(p /\\ q) \\/ (q /\\ p)").unwrap(),
            after_text: "p /\\ q".into(),
            claimed_rule: None,
            mode: Mode::Lenient,
            direction: ChainDirection::Forward,
        };
        let d = diagnose(&sub);
        assert_eq!(d.verdict.kind(), "buggy-but-equivalent");
        assert!(!d.accepted);
        let pilot = FeedbackPolicy::pilot().apply(d.clone());
        assert_eq!(pilot.verdict, Verdict::EquivalentUnrecognized);
        assert!(pilot.accepted);
        assert_eq!(FeedbackPolicy::enhanced().apply(d.clone()), d);
    }
}
