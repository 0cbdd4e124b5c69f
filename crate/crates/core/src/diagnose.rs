//! Rule recognition and the diagnosis pipeline for a single student step.

use serde::{Deserialize, Serialize};

use crate::formula::{equivalent, Formula, Position};
use crate::parse::{parse, SyntaxError};
use crate::rules::pattern::Bindings;
use crate::rules::{match_buggy, rule_by_id, standard_rules, RuleApplication, RuleDirection};
use crate::state::ChainDirection;

/// Whether a step must name the rule it applies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[default]
    Lenient,
}

// Deepest node of `before` under which all differences with `after` lie,
// following single differing children of same-shaped nodes.
fn diff_path(before: &Formula, after: &Formula) -> Vec<usize> {
    let mut path = Vec::new();
    let (mut a, mut b) = (before, after);
    loop {
        let (ca, cb) = (a.children(), b.children());
        if std::mem::discriminant(a) != std::mem::discriminant(b) || ca.len() != cb.len() {
            return path;
        }
        let mut differing = ca.iter().zip(&cb).enumerate().filter(|(_, (x, y))| x != y);
        match (differing.next(), differing.next()) {
            (Some((i, (x, y))), None) => {
                path.push(i);
                a = x;
                b = y;
            }
            _ => return path,
        }
    }
}

// A rewrite at `pos` can only produce `after` when it covers the
// difference. Operand ranges keep their node; a rewritten node may flatten
// into its parent.
fn covers_difference(pos: &Position, diff: &[usize]) -> bool {
    let p = &pos.path;
    if pos.span.is_some() {
        return diff.starts_with(p);
    }
    diff.starts_with(p) || (p.len() == diff.len() + 1 && p.starts_with(diff))
}

const SIZE_SLACK: usize = 4;

/// Every rule application turning `before` into `after`, ordered by
/// position (outermost first), then catalog order, variant, and direction
/// (left-to-right first).
pub fn recognize(before: &Formula, after: &Formula) -> Vec<RuleApplication> {
    let mut out: Vec<RuleApplication> = Vec::new();
    if before == after {
        return out;
    }
    let diff = diff_path(before, after);
    let mut candidates: Option<Vec<Formula>> = None;
    let none = Bindings::new();
    for pos in before.positions() {
        if !covers_difference(&pos, &diff) {
            continue;
        }
        let Ok(target) = before.subformula_at(&pos) else {
            continue;
        };
        for rule in standard_rules() {
            for (vi, v) in rule.variants.iter().enumerate() {
                for dir in RuleDirection::BOTH {
                    let free = v.free_metas(dir);
                    let hit = match free.as_slice() {
                        [] => v
                            .rewrite_all(dir, before, &pos, &none)
                            .is_ok_and(|rs| rs.contains(after)),
                        [m] => {
                            let (from, to) = v.sides(dir);
                            if from.matches(&target, &none).is_empty() {
                                false
                            } else {
                                let cands = candidates.get_or_insert_with(|| {
                                    let mut cs = after.subformulas_with_ranges();
                                    cs.sort_by_key(Formula::size);
                                    cs.dedup();
                                    cs
                                });
                                let probe = Bindings::new().with_var(*m, Formula::atom("_"));
                                let fixed = from
                                    .matches(&target, &none)
                                    .into_iter()
                                    .filter_map(|b| to.instantiate(&b.merged(&probe)))
                                    .map(|g| g.size())
                                    .max()
                                    .unwrap_or(0);
                                let needed =
                                    (after.size() + target.size()).saturating_sub(before.size());
                                let occurrences = to.count_var(*m).max(1);
                                cands.iter().any(|c| {
                                    let est = fixed + occurrences * (c.size() - 1);
                                    est + SIZE_SLACK >= needed
                                        && est <= needed + SIZE_SLACK
                                        && v.rewrite_all(
                                            dir,
                                            before,
                                            &pos,
                                            &Bindings::new().with_var(*m, c.clone()),
                                        )
                                        .is_ok_and(|rs| rs.contains(after))
                                })
                            }
                        }
                        _ => false,
                    };
                    if hit {
                        let app = RuleApplication {
                            rule_id: rule.id.to_string(),
                            variant: vi,
                            direction: dir,
                            position: pos.clone(),
                            before: before.clone(),
                            after: after.clone(),
                        };
                        if !out.contains(&app) {
                            out.push(app);
                        }
                    }
                }
            }
        }
    }
    out
}

/// A student step as submitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepSubmission {
    pub before: Formula,
    pub after_text: String,
    #[serde(default)]
    pub claimed_rule: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub direction: ChainDirection,
}

/// Outcome of the pipeline for one submission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    SyntaxError(SyntaxError),
    NoOp,
    Correct(RuleApplication),
    /// `detected` is withheld when no rule was named in strict mode.
    WrongRuleName {
        detected: Option<String>,
        claimed: Option<String>,
    },
    Buggy {
        rule_id: &'static str,
        position: Position,
        message: &'static str,
    },
    BuggyButEquivalent {
        rule_id: &'static str,
        message: &'static str,
    },
    NotEquivalent,
    EquivalentUnrecognized,
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::SyntaxError(_) => "syntax-error",
            Verdict::NoOp => "no-op",
            Verdict::Correct(_) => "correct",
            Verdict::WrongRuleName { .. } => "wrong-rule-name",
            Verdict::Buggy { .. } => "buggy",
            Verdict::BuggyButEquivalent { .. } => "buggy-but-equivalent",
            Verdict::NotEquivalent => "not-equivalent",
            Verdict::EquivalentUnrecognized => "equivalent-unrecognized",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvisoryKind {
    AbsorptionAvailable,
    SolutionLongerThanWorked,
    DivergedFromStrategy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Advisory {
    pub kind: AdvisoryKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub verdict: Verdict,
    pub accepted: bool,
    pub mode: Mode,
    pub advisories: Vec<Advisory>,
    /// The parsed new formula, absent on syntax errors.
    pub after: Option<Formula>,
}

/// Runs the pipeline: syntax, no-op, rule recognition with rule-name
/// comparison, then the semantic check and buggy-rule matching.
pub fn diagnose(sub: &StepSubmission) -> Diagnosis {
    let done = |verdict: Verdict, after: Option<Formula>| {
        let accepted = match &verdict {
            Verdict::NoOp | Verdict::Correct(_) => true,
            Verdict::EquivalentUnrecognized => sub.mode == Mode::Lenient,
            _ => false,
        };
        Diagnosis {
            verdict,
            accepted,
            mode: sub.mode,
            advisories: Vec::new(),
            after,
        }
    };
    let after = match parse(&sub.after_text) {
        Ok(f) => f,
        Err(e) => return done(Verdict::SyntaxError(e), None),
    };
    if sub.before.structurally_equal(&after) {
        return done(Verdict::NoOp, Some(after));
    }
    let apps = recognize(&sub.before, &after);
    let claim = sub
        .claimed_rule
        .as_deref()
        .map(str::trim)
        .filter(|c| !c.is_empty());
    if let Some(first) = apps.first() {
        let verdict = match claim {
            Some(c) => match apps
                .iter()
                .find(|a| a.rule().is_some_and(|r| r.answers_to(c)))
            {
                Some(app) => Verdict::Correct(app.clone()),
                None => Verdict::WrongRuleName {
                    detected: Some(first.rule_id.clone()),
                    claimed: Some(c.to_string()),
                },
            },
            None if sub.mode == Mode::Lenient => Verdict::Correct(first.clone()),
            None => Verdict::WrongRuleName {
                detected: None,
                claimed: None,
            },
        };
        return done(verdict, Some(after));
    }
    let bug = match_buggy(&sub.before, &after).into_iter().next();
    // both formulas parsed, so evaluation over their joint atoms is total
    let same = equivalent(&sub.before, &after).unwrap_or(false);
    let verdict = match (same, bug) {
        (false, Some(b)) => Verdict::Buggy {
            rule_id: b.rule.id,
            position: b.position,
            message: b.rule.message,
        },
        (false, None) => Verdict::NotEquivalent,
        (true, Some(b)) => Verdict::BuggyButEquivalent {
            rule_id: b.rule.id,
            message: b.rule.message,
        },
        (true, None) => Verdict::EquivalentUnrecognized,
    };
    done(verdict, Some(after))
}

fn rule_name(id: &str) -> String {
    rule_by_id(id).map_or_else(|| id.to_string(), |r| r.name.to_string())
}

impl Diagnosis {
    /// Feedback text shown to the student.
    pub fn message(&self) -> String {
        match &self.verdict {
            Verdict::SyntaxError(e) => e.to_string(),
            Verdict::NoOp => "only parentheses changed; the step is accepted but not counted".into(),
            Verdict::Correct(app) => format!("correct application of {}", rule_name(&app.rule_id)),
            Verdict::WrongRuleName {
                detected: Some(d),
                claimed,
            } => format!(
                "this step is an application of {}, not of {}",
                rule_name(d),
                claimed.as_deref().unwrap_or("the rule you named")
            ),
            Verdict::WrongRuleName { detected: None, .. } => {
                "name the rule that justifies this step".into()
            }
            Verdict::Buggy { message, .. } => message.to_string(),
            Verdict::BuggyButEquivalent { message, .. } => format!(
                "the new formula is equivalent, but it does not follow by a single rule: {message}"
            ),
            Verdict::NotEquivalent => {
                "the new formula is not equivalent to the previous one".into()
            }
            Verdict::EquivalentUnrecognized if self.accepted => {
                "the new formula is equivalent, but the step is not a single rule application; try to rewrite one rule at a time".into()
            }
            Verdict::EquivalentUnrecognized => {
                "the new formula is equivalent, but this is not a single rule application".into()
            }
        }
    }

    pub fn application(&self) -> Option<&RuleApplication> {
        match &self.verdict {
            Verdict::Correct(app) => Some(app),
            _ => None,
        }
    }

    pub fn record(&self) -> DiagnosisRecord {
        let (rule_id, variant, rule_direction, position) = match &self.verdict {
            Verdict::Correct(app) => (
                Some(app.rule_id.clone()),
                Some(app.variant),
                Some(app.direction),
                Some(app.position.clone()),
            ),
            Verdict::WrongRuleName { detected, .. } => (detected.clone(), None, None, None),
            Verdict::Buggy {
                rule_id, position, ..
            } => (Some(rule_id.to_string()), None, None, Some(position.clone())),
            Verdict::BuggyButEquivalent { rule_id, .. } => {
                (Some(rule_id.to_string()), None, None, None)
            }
            _ => (None, None, None, None),
        };
        DiagnosisRecord {
            kind: self.verdict.kind().to_string(),
            accepted: self.accepted,
            rule_id,
            variant,
            rule_direction,
            position,
            claimed_rule: match &self.verdict {
                Verdict::WrongRuleName { claimed, .. } => claimed.clone(),
                _ => None,
            },
            formula: self.after.clone(),
            syntax: match &self.verdict {
                Verdict::SyntaxError(e) => Some(e.clone()),
                _ => None,
            },
            message: self.message(),
            advisories: self.advisories.clone(),
        }
    }
}

/// Serialized form of a diagnosis, shared by the service, the CLI and the
/// session log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosisRecord {
    pub kind: String,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_direction: Option<RuleDirection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub syntax: Option<SyntaxError>,
    pub message: String,
    #[serde(default)]
    pub advisories: Vec<Advisory>,
}
