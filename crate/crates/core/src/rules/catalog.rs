use std::sync::OnceLock;

use serde::Serialize;

use super::pattern::build::*;
use super::pattern::{PHI, PSI};
use super::Rule;

fn build_catalog() -> Vec<Rule> {
    vec![
        Rule::new(
            "impl-def",
            "implication",
            "Implication",
            imp(phi(), psi()),
            or(not(phi()), psi()),
        ),
        Rule::new(
            "equiv-def",
            "equivalence",
            "Equivalence",
            iff(phi(), psi()),
            or(and(phi(), psi()), and(not(phi()), not(psi()))),
        ),
        Rule::new(
            "equiv-def-cnf",
            "equivalence",
            "Equivalence",
            iff(phi(), psi()),
            and(or(not(phi()), psi()), or(phi(), not(psi()))),
        ),
        Rule::new(
            "demorgan-and",
            "demorgan",
            "DeMorgan",
            not(and_each(PHI, item())),
            or_each(PHI, not(item())),
        ),
        Rule::new(
            "demorgan-or",
            "demorgan",
            "DeMorgan",
            not(or_each(PHI, item())),
            and_each(PHI, not(item())),
        ),
        Rule::new(
            "double-negation",
            "double-negation",
            "Double negation",
            not(not(phi())),
            phi(),
        ),
        Rule::new(
            "idempotency-and",
            "idempotency",
            "Idempotency",
            and(phi(), phi()),
            phi(),
        ),
        Rule::new(
            "idempotency-or",
            "idempotency",
            "Idempotency",
            or(phi(), phi()),
            phi(),
        ),
        Rule::new(
            "absorption-or",
            "absorption",
            "Absorption",
            or(phi(), and(phi(), psi())),
            phi(),
        ),
        Rule::new(
            "absorption-and",
            "absorption",
            "Absorption",
            and(phi(), or(phi(), psi())),
            phi(),
        ),
        Rule::new(
            "distr-and-over-or",
            "distribution",
            "Distribution",
            and(phi(), or_each(PSI, item())),
            or_each(PSI, and(phi(), item())),
        ),
        Rule::new(
            "distr-or-over-and",
            "distribution",
            "Distribution",
            or(phi(), and_each(PSI, item())),
            and_each(PSI, or(phi(), item())),
        ),
        Rule::new(
            "complement-or",
            "complement",
            "Complement",
            or(phi(), not(phi())),
            t(),
        ),
        Rule::new(
            "complement-and",
            "complement",
            "Complement",
            and(phi(), not(phi())),
            f(),
        ),
        Rule::new("true-and", "true-false", "True-false", and(phi(), t()), phi()),
        Rule::new("false-or", "true-false", "True-false", or(phi(), f()), phi()),
        Rule::new("true-or", "true-false", "True-false", or(phi(), t()), t()),
        Rule::new("false-and", "true-false", "True-false", and(phi(), f()), f()),
        Rule::new("not-true", "true-false", "True-false", not(t()), f()),
        Rule::new("not-false", "true-false", "True-false", not(f()), t()),
        Rule::new(
            "comm-and",
            "commutativity",
            "Commutativity",
            and(phi(), psi()),
            and(psi(), phi()),
        ),
        Rule::new(
            "comm-or",
            "commutativity",
            "Commutativity",
            or(phi(), psi()),
            or(psi(), phi()),
        ),
    ]
}

/// The fixed standard-equivalence catalog, in stable order.
pub fn standard_rules() -> &'static [Rule] {
    static CATALOG: OnceLock<Vec<Rule>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub fn rule_by_id(id: &str) -> Option<&'static Rule> {
    standard_rules().iter().find(|r| r.id == id)
}

/// One row of the exported rule sheet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleSheetEntry {
    pub id: &'static str,
    pub family: &'static str,
    pub name: &'static str,
    pub schema: String,
    pub reversible: bool,
    pub variants: Vec<String>,
}

/// Machine-readable rule sheet for a rule panel.
pub fn rule_sheet() -> Vec<RuleSheetEntry> {
    standard_rules()
        .iter()
        .map(|r| RuleSheetEntry {
            id: r.id,
            family: r.family,
            name: r.name,
            schema: format!("{} ⇔ {}", r.lhs(), r.rhs()),
            reversible: r.reversible(),
            variants: r
                .variants
                .iter()
                .map(|v| format!("{} ⇔ {}", v.lhs, v.rhs))
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Formula, Position};
    use crate::parse::parse;
    use crate::rules::pattern::Bindings;
    use crate::rules::RuleDirection;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn rule(id: &str) -> &'static Rule {
        rule_by_id(id).unwrap()
    }

    const LTR: RuleDirection = RuleDirection::LeftToRight;

    #[test]
    fn catalog_has_stable_unique_ids() {
        let ids: Vec<_> = standard_rules().iter().map(|r| r.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert_eq!(ids[0], "impl-def");
        assert!(ids.contains(&"absorption-or"));
        assert!(ids.contains(&"comm-and") && ids.contains(&"comm-or"));
        for id in ids {
            assert!(id.chars().all(|c| c.is_ascii_lowercase() || c == '-'));
        }
    }

    #[test]
    fn distribution_instance_is_in_the_catalog() {
        let r = rule("distr-and-over-or");
        let out = r
            .apply(0, LTR, &p("phi /\\ (psi \\/ chi)"), &Position::root())
            .unwrap();
        assert_eq!(out, p("(phi /\\ psi) \\/ (phi /\\ chi)"));
    }

    #[test]
    fn generalized_demorgan_in_one_step() {
        let out = rule("demorgan-and")
            .apply(0, LTR, &p("~(p /\\ q /\\ r)"), &Position::root())
            .unwrap();
        assert_eq!(out, p("~p \\/ ~q \\/ ~r"));
    }

    #[test]
    fn commutative_variant_of_distribution() {
        let r = rule("distr-and-over-or");
        assert_eq!(r.variants.len(), 2);
        let out = r
            .apply(1, LTR, &p("(psi \\/ chi) /\\ phi"), &Position::root())
            .unwrap();
        assert_eq!(out, p("(psi /\\ phi) \\/ (chi /\\ phi)"));
        assert!(r.apply(0, LTR, &p("(psi \\/ chi) /\\ phi"), &Position::root()).is_err());
    }

    #[test]
    fn idempotency_inside_a_flat_chain() {
        let out = rule("idempotency-or")
            .apply(0, LTR, &p("q \\/ p \\/ p \\/ s"), &Position::span(vec![], 1, 2))
            .unwrap();
        assert_eq!(out, p("q \\/ p \\/ s"));
    }

    #[test]
    fn double_negation() {
        let out = rule("double-negation")
            .apply(0, LTR, &p("~~p"), &Position::root())
            .unwrap();
        assert_eq!(out, p("p"));
    }

    #[test]
    fn symmetric_rules_have_no_duplicate_variant() {
        assert_eq!(rule("comm-and").variants.len(), 1);
        assert_eq!(rule("idempotency-or").variants.len(), 1);
        assert_eq!(rule("absorption-or").variants.len(), 2);
        assert_eq!(rule("complement-and").variants.len(), 2);
        assert_eq!(rule("demorgan-or").variants.len(), 1);
    }

    #[test]
    fn absorbed_commuted_form_is_a_variant() {
        let out = rule("absorption-or")
            .apply(1, LTR, &p("(p /\\ q) \\/ p"), &Position::root())
            .unwrap();
        assert_eq!(out, p("p"));
    }

    #[test]
    fn right_to_left_with_free_metavariable() {
        let r = rule("complement-or");
        assert!(!r.reversible());
        let err = r.apply(0, RuleDirection::RightToLeft, &p("T"), &Position::root());
        assert!(matches!(err, Err(super::super::RuleError::Unbound(_))));
        let b = Bindings::new().with_var(PHI, p("q"));
        let out = r
            .apply_with(0, RuleDirection::RightToLeft, &p("p /\\ T"), &Position::at(vec![1]), &b)
            .unwrap();
        assert_eq!(out, p("p /\\ (q \\/ ~q)"));
    }

    #[test]
    fn rule_sheet_exports_every_rule() {
        let sheet = rule_sheet();
        assert_eq!(sheet.len(), standard_rules().len());
        let dm = sheet.iter().find(|e| e.id == "demorgan-and").unwrap();
        assert_eq!(dm.schema, "¬(φ1 ∧ … ∧ φn) ⇔ ¬φ1 ∨ … ∨ ¬φn");
        assert!(serde_json::to_string(&sheet).unwrap().contains("\"reversible\""));
    }

    #[test]
    fn family_names_are_accepted_as_claims() {
        assert!(rule("demorgan-or").answers_to("demorgan"));
        assert!(rule("demorgan-or").answers_to("DeMorgan-Or"));
        assert!(!rule("demorgan-or").answers_to("distribution"));
    }
}
