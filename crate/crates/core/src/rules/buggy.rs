//! Common student mistakes, formalized as non-sound rewrites.

use std::sync::OnceLock;

use crate::formula::{Formula, Position};
use crate::parse::parse;

use super::pattern::build::*;
use super::pattern::{Bindings, Meta, Pattern, CHI, PHI, PSI};
use super::{with_commutative_variants, RuleDirection, Variant};

#[derive(Clone, Debug)]
pub struct BuggyRule {
    pub id: &'static str,
    pub message: &'static str,
    pub variants: Vec<Variant>,
    witness_vars: &'static [(Meta, &'static str)],
    witness_lists: &'static [(Meta, &'static [&'static str])],
}

impl BuggyRule {
    fn new(
        id: &'static str,
        lhs: Pattern,
        rhs: Pattern,
        message: &'static str,
        witness_vars: &'static [(Meta, &'static str)],
        witness_lists: &'static [(Meta, &'static [&'static str])],
    ) -> Self {
        BuggyRule {
            id,
            message,
            variants: with_commutative_variants(lhs, rhs),
            witness_vars,
            witness_lists,
        }
    }

    pub fn lhs(&self) -> &Pattern {
        &self.variants[0].lhs
    }

    pub fn rhs(&self) -> &Pattern {
        &self.variants[0].rhs
    }

    /// Stored instantiation under which the two sides are not equivalent.
    pub fn witness(&self) -> Bindings {
        let mut b = Bindings::new();
        for (m, text) in self.witness_vars {
            b = b.with_var(*m, parse(text).expect("witness formula"));
        }
        for (m, items) in self.witness_lists {
            let fs = items.iter().map(|t| parse(t).expect("witness formula")).collect();
            b = b.with_list(*m, fs);
        }
        b
    }

    /// The witness pair (lhs instance, rhs instance).
    pub fn witness_instance(&self) -> (Formula, Formula) {
        let b = self.witness();
        (
            self.lhs().instantiate(&b).expect("witness binds lhs"),
            self.rhs().instantiate(&b).expect("witness binds rhs"),
        )
    }
}

const PQ: &[(Meta, &str)] = &[(PHI, "p"), (PSI, "q")];
const PQR: &[(Meta, &str)] = &[(PHI, "p"), (PSI, "q"), (CHI, "r")];
const P: &[(Meta, &str)] = &[(PHI, "p")];
const LIST_PQ: &[(Meta, &[&str])] = &[(PHI, &["p", "q"])];
const NO_LISTS: &[(Meta, &[&str])] = &[];

fn build_buggy() -> Vec<BuggyRule> {
    vec![
        BuggyRule::new(
            "demorgan-keeps-disjunction",
            not(or_each(PHI, item())),
            or_each(PHI, not(item())),
            "when applying DeMorgan's rule, a disjunction is transformed into a conjunction",
            &[],
            LIST_PQ,
        ),
        BuggyRule::new(
            "demorgan-keeps-conjunction",
            not(and_each(PHI, item())),
            and_each(PHI, not(item())),
            "when applying DeMorgan's rule, a conjunction is transformed into a disjunction",
            &[],
            LIST_PQ,
        ),
        BuggyRule::new(
            "complement-of-compound",
            and(or(phi(), psi()), or(not(phi()), not(psi()))),
            f(),
            "this is not a contradiction: ¬φ ∨ ¬ψ is not the negation of φ ∨ ψ, so the complement rule does not apply",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "complement-of-compound-dual",
            or(and(phi(), psi()), and(not(phi()), not(psi()))),
            t(),
            "this is not a tautology: ¬φ ∧ ¬ψ is not the negation of φ ∧ ψ, so the complement rule does not apply",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "demorgan-operands-not-negated-and",
            not(and_each(PHI, item())),
            or_each(PHI, item()),
            "when applying DeMorgan's rule, every operand has to be negated",
            &[],
            LIST_PQ,
        ),
        BuggyRule::new(
            "demorgan-operands-not-negated-or",
            not(or_each(PHI, item())),
            and_each(PHI, item()),
            "when applying DeMorgan's rule, every operand has to be negated",
            &[],
            LIST_PQ,
        ),
        BuggyRule::new(
            "implication-wrong-negation",
            imp(phi(), psi()),
            or(phi(), not(psi())),
            "φ → ψ is rewritten as ¬φ ∨ ψ: the left-hand side is negated, not the right-hand side",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "distribution-dropped-operand",
            and(phi(), or(psi(), chi())),
            or(and(phi(), psi()), chi()),
            "when distributing, the conjunct has to be combined with every disjunct",
            PQR,
            NO_LISTS,
        ),
        BuggyRule::new(
            "distribution-dropped-operand-dual",
            or(phi(), and(psi(), chi())),
            and(or(phi(), psi()), chi()),
            "when distributing, the disjunct has to be combined with every conjunct",
            PQR,
            NO_LISTS,
        ),
        BuggyRule::new(
            "absorption-wrong-side",
            or(phi(), and(phi(), psi())),
            and(phi(), psi()),
            "absorption keeps the simpler formula: φ ∨ (φ ∧ ψ) becomes φ",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "absorption-wrong-side-dual",
            and(phi(), or(phi(), psi())),
            or(phi(), psi()),
            "absorption keeps the simpler formula: φ ∧ (φ ∨ ψ) becomes φ",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "double-negation-removes-one",
            not(not(phi())),
            not(phi()),
            "double negation removes both negations: ¬¬φ becomes φ",
            P,
            NO_LISTS,
        ),
        BuggyRule::new(
            "idempotency-different-operands-or",
            or(phi(), psi()),
            phi(),
            "idempotency only removes an operand that is identical to another one",
            PQ,
            NO_LISTS,
        ),
        BuggyRule::new(
            "idempotency-different-operands-and",
            and(phi(), psi()),
            phi(),
            "idempotency only removes an operand that is identical to another one",
            PQ,
            NO_LISTS,
        ),
    ]
}

/// The buggy-rule catalog in tie-break order.
pub fn buggy_rules() -> &'static [BuggyRule] {
    static CATALOG: OnceLock<Vec<BuggyRule>> = OnceLock::new();
    CATALOG.get_or_init(build_buggy)
}

#[derive(Clone, Debug)]
pub struct BuggyMatch {
    pub rule: &'static BuggyRule,
    pub position: Position,
}

/// Buggy rules whose application somewhere in `before` yields `after`,
/// outermost position first, catalog order within a position.
pub fn match_buggy(before: &Formula, after: &Formula) -> Vec<BuggyMatch> {
    let mut out = Vec::new();
    if before == after {
        return out;
    }
    let no_extra = Bindings::new();
    for pos in before.positions() {
        for rule in buggy_rules() {
            let hit = rule.variants.iter().any(|v| {
                v.rewrite_all(RuleDirection::LeftToRight, before, &pos, &no_extra)
                    .map(|rs| rs.iter().any(|r| r == after))
                    .unwrap_or(false)
            });
            if hit {
                out.push(BuggyMatch {
                    rule,
                    position: pos.clone(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::equivalent;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn witnesses_are_not_equivalent() {
        for r in buggy_rules() {
            let (l, rhs) = r.witness_instance();
            assert!(!equivalent(&l, &rhs).unwrap(), "{}: {l} vs {rhs}", r.id);
        }
    }

    #[test]
    fn demorgan_mistake_is_matched_at_first_disjunct() {
        let before = p("~(p \\/ q) \\/ (~~p /\\ ~q) \\/ ~q");
        let after = p("(~p \\/ ~q) \\/ (~~p /\\ ~q) \\/ ~q");
        let ms = match_buggy(&before, &after);
        assert_eq!(ms[0].rule.id, "demorgan-keeps-disjunction");
        assert_eq!(ms[0].position, Position::at(vec![0]));
        assert!(ms[0].rule.message.contains("a disjunction is transformed into a conjunction"));
    }

    #[test]
    fn complement_of_compound_at_root() {
        let ms = match_buggy(&p("(p \\/ q) /\\ (~p \\/ ~q)"), &p("F"));
        assert_eq!(ms[0].rule.id, "complement-of-compound");
        assert_eq!(ms[0].position, Position::root());
    }

    #[test]
    fn distribution_dropping_an_operand() {
        let ms = match_buggy(&p("p /\\ (q \\/ r)"), &p("(p /\\ q) \\/ r"));
        assert_eq!(ms[0].rule.id, "distribution-dropped-operand");
    }

    #[test]
    fn no_change_no_bug() {
        assert!(match_buggy(&p("p"), &p("p")).is_empty());
    }
}
