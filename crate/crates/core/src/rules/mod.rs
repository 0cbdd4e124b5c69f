//! Standard equivalences, buggy rules, and positional rule application.

mod buggy;
mod catalog;
pub mod pattern;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, FormulaError, Position};
use pattern::{Bindings, Meta, Pattern};

pub use buggy::{buggy_rules, match_buggy, BuggyMatch, BuggyRule};
pub use catalog::{rule_by_id, rule_sheet, standard_rules, RuleSheetEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleDirection {
    LeftToRight,
    RightToLeft,
}

impl RuleDirection {
    pub const BOTH: [RuleDirection; 2] = [RuleDirection::LeftToRight, RuleDirection::RightToLeft];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule does not match at {0}")]
    NoMatch(Position),
    #[error("rule has no variant {0}")]
    UnknownVariant(usize),
    #[error("metavariable {0} must be supplied to apply this rule right-to-left")]
    Unbound(Meta),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// One schema of a rule: the base form or a commutative variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub lhs: Pattern,
    pub rhs: Pattern,
}

impl Variant {
    pub fn sides(&self, dir: RuleDirection) -> (&Pattern, &Pattern) {
        match dir {
            RuleDirection::LeftToRight => (&self.lhs, &self.rhs),
            RuleDirection::RightToLeft => (&self.rhs, &self.lhs),
        }
    }

    /// Metavariables of the produced side that matching cannot bind.
    pub fn free_metas(&self, dir: RuleDirection) -> Vec<Meta> {
        let (from, to) = self.sides(dir);
        let (bound, _) = from.metas();
        let (needed, _) = to.metas();
        needed.into_iter().filter(|m| !bound.contains(m)).collect()
    }

    /// Every distinct result of rewriting `f` at `pos`. `extra` supplies
    /// values for metavariables the match leaves free.
    pub fn rewrite_all(
        &self,
        dir: RuleDirection,
        f: &Formula,
        pos: &Position,
        extra: &Bindings,
    ) -> Result<Vec<Formula>, RuleError> {
        let (from, to) = self.sides(dir);
        let spanned;
        let target = match pos.span {
            None => f
                .node_at(&pos.path)
                .ok_or_else(|| FormulaError::InvalidPosition(pos.clone()))?,
            Some(_) => {
                spanned = f.subformula_at(pos)?;
                &spanned
            }
        };
        let mut out: Vec<Formula> = Vec::new();
        for b in from.matches(target, &Bindings::new()) {
            let b = b.merged(extra);
            let Some(g) = to.instantiate(&b) else {
                let missing = self.free_metas(dir).into_iter().find(|m| b.var(*m).is_none());
                return Err(RuleError::Unbound(missing.unwrap_or_default()));
            };
            let result = f.replace_at(pos, g)?;
            if !out.contains(&result) {
                out.push(result);
            }
        }
        Ok(out)
    }
}

/// A named, semantics-preserving rewrite law.
#[derive(Clone, Debug)]
pub struct Rule {
    pub id: &'static str,
    /// Shared name of a rule group, e.g. `demorgan` for both DeMorgan laws.
    pub family: &'static str,
    pub name: &'static str,
    /// `variants[0]` is the base schema; the rest are commutative variants.
    pub variants: Vec<Variant>,
}

impl Rule {
    pub(crate) fn new(
        id: &'static str,
        family: &'static str,
        name: &'static str,
        lhs: Pattern,
        rhs: Pattern,
    ) -> Self {
        Rule {
            id,
            family,
            name,
            variants: with_commutative_variants(lhs, rhs),
        }
    }

    pub fn lhs(&self) -> &Pattern {
        &self.variants[0].lhs
    }

    pub fn rhs(&self) -> &Pattern {
        &self.variants[0].rhs
    }

    pub fn variant(&self, i: usize) -> Result<&Variant, RuleError> {
        self.variants.get(i).ok_or(RuleError::UnknownVariant(i))
    }

    /// True when a student naming `claim` means this rule.
    pub fn answers_to(&self, claim: &str) -> bool {
        let claim = claim.trim().to_ascii_lowercase();
        claim == self.id || claim == self.family
    }

    /// Right-to-left application needs no supplied bindings.
    pub fn reversible(&self) -> bool {
        self.variants[0].free_metas(RuleDirection::RightToLeft).is_empty()
    }

    pub fn apply_all(
        &self,
        variant: usize,
        dir: RuleDirection,
        f: &Formula,
        pos: &Position,
        extra: &Bindings,
    ) -> Result<Vec<Formula>, RuleError> {
        self.variant(variant)?.rewrite_all(dir, f, pos, extra)
    }

    /// First result of rewriting `f` at `pos`.
    pub fn apply(
        &self,
        variant: usize,
        dir: RuleDirection,
        f: &Formula,
        pos: &Position,
    ) -> Result<Formula, RuleError> {
        self.apply_with(variant, dir, f, pos, &Bindings::new())
    }

    pub fn apply_with(
        &self,
        variant: usize,
        dir: RuleDirection,
        f: &Formula,
        pos: &Position,
        extra: &Bindings,
    ) -> Result<Formula, RuleError> {
        self.apply_all(variant, dir, f, pos, extra)?
            .into_iter()
            .next()
            .ok_or_else(|| RuleError::NoMatch(pos.clone()))
    }

    /// Position-independent match test on a single formula.
    pub fn matches_at(&self, f: &Formula, pos: &Position, dir: RuleDirection) -> bool {
        let Ok(target) = f.subformula_at(pos) else {
            return false;
        };
        self.variants
            .iter()
            .any(|v| !v.sides(dir).0.matches(&target, &Bindings::new()).is_empty())
    }
}

/// Base schema plus its commutative variant, when the lhs is a binary
/// `∧`/`∨` whose swap is not the same schema up to renaming.
pub(crate) fn with_commutative_variants(lhs: Pattern, rhs: Pattern) -> Vec<Variant> {
    let mut out = vec![Variant {
        lhs: lhs.clone(),
        rhs: rhs.clone(),
    }];
    if let Some((conn, a, b)) = lhs.binary_top() {
        let swapped = match conn {
            crate::formula::Connective::And => Pattern::And(vec![b.clone(), a.clone()]),
            crate::formula::Connective::Or => Pattern::Or(vec![b.clone(), a.clone()]),
        };
        let v = Variant {
            rhs: rhs.mirrored(conn),
            lhs: swapped,
        };
        if Pattern::canonical_pair(&v.lhs, &v.rhs) != Pattern::canonical_pair(&lhs, &rhs) {
            out.push(v);
        }
    }
    out
}

/// A recognized single rule step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleApplication {
    pub rule_id: String,
    pub variant: usize,
    pub direction: RuleDirection,
    pub position: Position,
    pub before: Formula,
    pub after: Formula,
}

impl RuleApplication {
    pub fn rule(&self) -> Option<&'static Rule> {
        rule_by_id(&self.rule_id)
    }
}
