//! Rewrite strategies for DNF/CNF and for equivalence proofs.
//!
//! The normal-form strategy runs in phases, always working on the first
//! phase that still has a redex:
//!
//! 1. eliminate `<->`, innermost occurrence first, with the definition that
//!    ends up in the target shape once negations are pushed inward
//! 2. eliminate `->`, leftmost-outermost
//! 3. push negations inward (DeMorgan, double negation, `~T`, `~F`)
//! 4. distribute, leftmost-outermost
//! 5. simplify: complement, true/false laws, idempotency, absorption, each
//!    group searched leftmost-outermost; when only a non-adjacent redex pair
//!    is left, one commutativity swap moves its right element closer.
//!
//! Simplification runs eagerly: whenever it has work, it goes first.
//!
//! CNF is the dual of DNF throughout. Proofs normalize both sides to
//! simplified DNF and meet where the two traces first share a formula.
//! When simplified forms differ, both sides continue to the canonical DNF
//! over the joint atoms (full minterms, literals and minterms sorted).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{counterexample, Connective, Formula, FormulaError, Position, Valuation};
use crate::rules::pattern::{Bindings, PHI};
use crate::rules::{rule_by_id, Rule, RuleApplication, RuleDirection};
use crate::state::{DerivationState, ProofState, Step};

/// Safety bound on generated derivations.
pub const STEP_LIMIT: usize = 10_000;

const LTR: RuleDirection = RuleDirection::LeftToRight;
const RTL: RuleDirection = RuleDirection::RightToLeft;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalForm {
    Dnf,
    Cnf,
}

impl NormalForm {
    /// Connective at the top of the normal form.
    pub fn outer(self) -> Connective {
        match self {
            NormalForm::Dnf => Connective::Or,
            NormalForm::Cnf => Connective::And,
        }
    }

    pub fn inner(self) -> Connective {
        self.outer().dual()
    }

    pub fn distribution_rule(self) -> &'static str {
        match self {
            NormalForm::Dnf => "distr-and-over-or",
            NormalForm::Cnf => "distr-or-over-and",
        }
    }

    /// Definition of `<->` whose result already has this normal form's shape.
    pub fn equivalence_rule(self) -> &'static str {
        match self {
            NormalForm::Dnf => "equiv-def",
            NormalForm::Cnf => "equiv-def-cnf",
        }
    }

    pub fn holds(self, f: &Formula) -> bool {
        is_normal(f, self.outer())
    }
}

fn is_lit(f: &Formula) -> bool {
    f.is_literal() || matches!(f, Formula::True | Formula::False)
}

fn is_clause(f: &Formula, inner: Connective) -> bool {
    is_lit(f) || (f.connective() == Some(inner) && f.operands().unwrap().iter().all(is_lit))
}

fn is_normal(f: &Formula, outer: Connective) -> bool {
    let inner = outer.dual();
    is_clause(f, inner)
        || (f.connective() == Some(outer)
            && f.operands().unwrap().iter().all(|c| is_clause(c, inner)))
}

/// Disjunction of conjunctions of literals; a lone literal, conjunction or
/// constant counts.
pub fn is_dnf(f: &Formula) -> bool {
    is_normal(f, Connective::Or)
}

pub fn is_cnf(f: &Formula) -> bool {
    is_normal(f, Connective::And)
}

fn rule(id: &str) -> &'static Rule {
    rule_by_id(id).expect("rule id from the standard catalog")
}

fn app(
    rule: &'static Rule,
    variant: usize,
    dir: RuleDirection,
    f: &Formula,
    pos: &Position,
    extra: &Bindings,
) -> Option<RuleApplication> {
    let after = rule.apply_with(variant, dir, f, pos, extra).ok()?;
    (after != *f).then(|| RuleApplication {
        rule_id: rule.id.to_string(),
        variant,
        direction: dir,
        position: pos.clone(),
        before: f.clone(),
        after,
    })
}

fn node_paths(f: &Formula) -> Vec<(Vec<usize>, &Formula)> {
    fn go<'a>(f: &'a Formula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
        out.push((path.clone(), f));
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

fn count(f: &Formula, pred: &dyn Fn(&Formula) -> bool) -> usize {
    usize::from(pred(f)) + f.children().into_iter().map(|c| count(c, pred)).sum::<usize>()
}

fn is_iff(f: &Formula) -> bool {
    matches!(f, Formula::Iff(..))
}

fn is_imp(f: &Formula) -> bool {
    matches!(f, Formula::Imp(..))
}

/// Strategy phase, in the order the phases are worked through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Equivalence,
    Implication,
    Negation,
    Distribution,
    Simplification,
    Done,
}

// Sign of the position: Some(true) positive, Some(false) negative, None
// when an enclosing `<->` makes it both.
fn polarity(f: &Formula, path: &[usize]) -> Option<bool> {
    let mut positive = true;
    let mut node = f;
    for &i in path {
        match node {
            Formula::Not(_) => positive = !positive,
            Formula::Imp(..) if i == 0 => positive = !positive,
            Formula::Iff(..) => return None,
            _ => {}
        }
        node = node.children()[i];
    }
    Some(positive)
}

fn equivalence_step(f: &Formula, nf: NormalForm) -> Option<RuleApplication> {
    let (path, _) = node_paths(f)
        .into_iter()
        .find(|(_, n)| is_iff(n) && count(n, &is_iff) == 1)?;
    // under a negation the other definition turns into the target shape
    let target = match polarity(f, &path) {
        Some(false) => match nf {
            NormalForm::Dnf => NormalForm::Cnf,
            NormalForm::Cnf => NormalForm::Dnf,
        },
        _ => nf,
    };
    app(rule(target.equivalence_rule()), 0, LTR, f, &Position::at(path), &Bindings::new())
}

fn implication_step(f: &Formula) -> Option<RuleApplication> {
    let (path, _) = node_paths(f).into_iter().find(|(_, n)| is_imp(n))?;
    app(rule("impl-def"), 0, LTR, f, &Position::at(path), &Bindings::new())
}

fn negation_rule(f: &Formula) -> Option<&'static str> {
    let Formula::Not(c) = f else { return None };
    Some(match **c {
        Formula::And(_) => "demorgan-and",
        Formula::Or(_) => "demorgan-or",
        Formula::Not(_) => "double-negation",
        Formula::True => "not-true",
        Formula::False => "not-false",
        _ => return None,
    })
}

fn negation_step(f: &Formula) -> Option<RuleApplication> {
    let (path, id) = node_paths(f)
        .into_iter()
        .find_map(|(p, n)| negation_rule(n).map(|id| (p, id)))?;
    app(rule(id), 0, LTR, f, &Position::at(path), &Bindings::new())
}

fn distribution_step(f: &Formula, nf: NormalForm) -> Option<RuleApplication> {
    for (path, node) in node_paths(f) {
        if node.connective() != Some(nf.inner()) {
            continue;
        }
        let ops = node.operands().unwrap();
        let Some(k) = ops.iter().position(|o| o.connective() == Some(nf.outer())) else {
            continue;
        };
        let n = ops.len();
        let (variant, pos) = if k == n - 1 {
            (0, Position::at(path))
        } else if k == 0 {
            (1, Position::at(path))
        } else {
            (0, Position::span(path, 0, k + 1))
        };
        return app(rule(nf.distribution_rule()), variant, LTR, f, &pos, &Bindings::new());
    }
    None
}

/// Simplification rule groups in priority order.
pub const SIMPLIFICATION_GROUPS: [&[&str]; 4] = [
    &["complement-or", "complement-and"],
    &["true-and", "false-or", "true-or", "false-and", "not-true", "not-false"],
    &["idempotency-or", "idempotency-and"],
    &["absorption-or", "absorption-and"],
];

pub fn is_simplification_rule(id: &str) -> bool {
    SIMPLIFICATION_GROUPS.iter().any(|g| g.contains(&id))
}

// Nodes and adjacent operand pairs; wider ranges are reached through the
// redex-pair reordering below.
fn simplification_positions(f: &Formula) -> Vec<Position> {
    let mut out = Vec::new();
    for (path, node) in node_paths(f) {
        out.push(Position::at(path.clone()));
        if let Some(ops) = node.operands() {
            if ops.len() > 2 {
                out.extend((0..ops.len() - 1).map(|k| Position::span(path.clone(), k, 2)));
            }
        }
    }
    out
}

fn top_fits(f: &Formula, pos: &Position, r: &Rule) -> bool {
    let Some(node) = f.node_at(&pos.path) else {
        return false;
    };
    use crate::rules::pattern::Pattern;
    match &r.variants[0].lhs {
        Pattern::And(_) => node.connective() == Some(Connective::And),
        Pattern::Or(_) => node.connective() == Some(Connective::Or),
        Pattern::Not(_) => pos.span.is_none() && matches!(node, Formula::Not(_)),
        _ => true,
    }
}

// On a two-operand span the binary patterns bind one operand per side, so
// only these pairs can match.
fn pair_may_simplify(f: &Formula, pos: &Position) -> bool {
    let Some(span) = pos.span else {
        return true;
    };
    let Some(node) = f.node_at(&pos.path) else {
        return false;
    };
    let (Some(conn), Some(ops)) = (node.connective(), node.operands()) else {
        return false;
    };
    let (a, b) = (&ops[span.start], &ops[span.start + 1]);
    let constant = |x: &Formula| matches!(x, Formula::True | Formula::False);
    span.len == 2 && (constant(a) || constant(b) || redex_pair(a, b, conn))
}

fn contiguous_simplification(f: &Formula) -> Option<RuleApplication> {
    let positions = simplification_positions(f);
    let none = Bindings::new();
    for group in SIMPLIFICATION_GROUPS {
        for pos in &positions {
            if !pair_may_simplify(f, pos) {
                continue;
            }
            for id in group {
                let r = rule(id);
                if !top_fits(f, pos, r) {
                    continue;
                }
                for v in 0..r.variants.len() {
                    if let Some(a) = app(r, v, LTR, f, pos, &none) {
                        return Some(a);
                    }
                }
            }
        }
    }
    None
}

fn negation_of(a: &Formula, b: &Formula) -> bool {
    matches!(a, Formula::Not(inner) if **inner == *b)
}

// `a` absorbs `b` inside a `conn` node: `b` is a dual node whose leading
// operands are exactly `a`'s.
fn absorbs(a: &Formula, b: &Formula, conn: Connective) -> bool {
    let dual = conn.dual();
    if b.connective() != Some(dual) {
        return false;
    }
    let bops = b.operands().unwrap();
    let aops: Vec<&Formula> = match a.operands() {
        Some(ops) if a.connective() == Some(dual) => ops.iter().collect(),
        _ => vec![a],
    };
    aops.len() < bops.len() && aops.iter().zip(bops).all(|(x, y)| *x == y)
}

/// Two operands of a `conn` node that a simplification rule could combine
/// once adjacent.
fn redex_pair(a: &Formula, b: &Formula, conn: Connective) -> bool {
    a == b
        || negation_of(a, b)
        || negation_of(b, a)
        || absorbs(a, b, conn)
        || absorbs(b, a, conn)
}

// (gap, node path, right index, operand count) of the closest redex pair.
fn closest_redex_pair(f: &Formula) -> Option<(usize, Vec<usize>, usize, usize)> {
    let mut best: Option<(usize, Vec<usize>, usize, usize)> = None;
    for (path, node) in node_paths(f) {
        let (Some(conn), Some(ops)) = (node.connective(), node.operands()) else {
            continue;
        };
        for j in 1..ops.len() {
            for i in 0..j {
                let gap = j - i - 1;
                if best.as_ref().is_some_and(|b| b.0 <= gap) {
                    continue;
                }
                if redex_pair(&ops[i], &ops[j], conn) {
                    best = Some((gap, path.clone(), j, ops.len()));
                }
            }
        }
    }
    best
}

// A swap, by commutativity over a span, that moves operand `from` of the
// node at `path` to index `to`.
fn move_operand(f: &Formula, path: Vec<usize>, from: usize, to: usize) -> Option<RuleApplication> {
    let node = f.node_at(&path)?;
    let conn = node.connective()?;
    let mut ops = node.operands()?.to_vec();
    let moved = ops.remove(from);
    ops.insert(to, moved);
    let pos = Position::span(path.clone(), from.min(to), from.abs_diff(to) + 1);
    let (id, node) = match conn {
        Connective::And => ("comm-and", Formula::and(ops)),
        Connective::Or => ("comm-or", Formula::or(ops)),
    };
    let after = f.replace_at(&Position::at(path), node).ok()?;
    let found = rule(id).variants[0]
        .rewrite_all(LTR, f, &pos, &Bindings::new())
        .ok()?
        .contains(&after);
    found.then(|| RuleApplication {
        rule_id: id.to_string(),
        variant: 0,
        direction: LTR,
        position: pos,
        before: f.clone(),
        after,
    })
}

/// Moves the later operand of the closest redex pair next to the earlier
/// one with a single swap over the operands in between.
fn reorder_step(f: &Formula) -> Option<RuleApplication> {
    let (gap, path, j, _) = closest_redex_pair(f)?;
    if gap == 0 {
        return None;
    }
    move_operand(f, path, j, j - gap)
}

fn annihilator(conn: Connective) -> Formula {
    match conn {
        Connective::And => Formula::False,
        Connective::Or => Formula::True,
    }
}

// `F` inside a conjunction (or `T` inside a disjunction) whose node has no
// annihilator at either end.
fn interior_annihilators(f: &Formula) -> Vec<(Vec<usize>, usize, usize)> {
    let mut out = Vec::new();
    for (path, node) in node_paths(f) {
        let (Some(conn), Some(ops)) = (node.connective(), node.operands()) else {
            continue;
        };
        let n = ops.len();
        let zero = annihilator(conn);
        if ops[0] == zero || ops[n - 1] == zero {
            continue;
        }
        for k in 1..n - 1 {
            if ops[k] == zero {
                out.push((path.clone(), k, n));
            }
        }
    }
    out
}

/// Moves an interior annihilator to the end of its node, where one
/// application of `false-and`/`true-or` removes the whole node.
fn annihilator_step(f: &Formula) -> Option<RuleApplication> {
    let (path, k, n) = interior_annihilators(f).into_iter().next()?;
    move_operand(f, path, k, n - 1)
}

/// The next step of the normal-form strategy together with its phase.
/// Simplifications (and the swaps that enable them) are taken as soon as
/// they appear, which keeps intermediate formulas small; they never
/// increase the progress measure.
pub fn strategy_step_with_phase(f: &Formula, nf: NormalForm) -> Option<(Phase, RuleApplication)> {
    let simplification = annihilator_step(f)
        .or_else(|| contiguous_simplification(f))
        .or_else(|| reorder_step(f));
    if let Some(a) = simplification {
        return Some((Phase::Simplification, a));
    }
    if let Some(a) = equivalence_step(f, nf) {
        return Some((Phase::Equivalence, a));
    }
    if let Some(a) = implication_step(f) {
        return Some((Phase::Implication, a));
    }
    if let Some(a) = negation_step(f) {
        return Some((Phase::Negation, a));
    }
    distribution_step(f, nf).map(|a| (Phase::Distribution, a))
}

pub fn strategy_step(f: &Formula, nf: NormalForm) -> Option<RuleApplication> {
    strategy_step_with_phase(f, nf).map(|(_, a)| a)
}

/// The first phase with remaining work on `f`, ignoring simplifications
/// that are possible earlier.
pub fn phase(f: &Formula, nf: NormalForm) -> Phase {
    if count(f, &is_iff) > 0 {
        Phase::Equivalence
    } else if count(f, &is_imp) > 0 {
        Phase::Implication
    } else if node_paths(f).iter().any(|(_, n)| negation_rule(n).is_some()) {
        Phase::Negation
    } else if distribution_step(f, nf).is_some() {
        Phase::Distribution
    } else if annihilator_step(f).is_some()
        || contiguous_simplification(f).is_some()
        || reorder_step(f).is_some()
    {
        Phase::Simplification
    } else {
        Phase::Done
    }
}

/// In the normal form and admitting no further simplification.
pub fn is_finished(f: &Formula, nf: NormalForm) -> bool {
    nf.holds(f) && strategy_step(f, nf).is_none()
}

/// Lexicographic progress measure of the normal-form strategy; every
/// strategy step strictly decreases it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    pub equivalences: usize,
    pub implications: usize,
    pub negation_weight: usize,
    pub distribution_weight: u128,
    pub size: usize,
    pub interior_annihilators: usize,
    pub redex_gap: usize,
}

fn negation_weight(f: &Formula) -> usize {
    let own = match f {
        Formula::Not(c) if !matches!(**c, Formula::Atom(_)) => c.size(),
        _ => 0,
    };
    own + f.children().into_iter().map(negation_weight).sum::<usize>()
}

// Literals weigh 2; the inner connective multiplies, the outer one adds.
fn distribution_weight(f: &Formula, nf: NormalForm) -> u128 {
    match f {
        Formula::Atom(_) | Formula::True | Formula::False | Formula::Not(_) => 2,
        Formula::And(ops) | Formula::Or(ops) => {
            let ws = ops.iter().map(|o| distribution_weight(o, nf));
            if f.connective() == Some(nf.inner()) {
                ws.fold(1u128, |acc, w| acc.saturating_mul(w))
            } else {
                ws.fold(ops.len() as u128 - 1, |acc, w| acc.saturating_add(w))
            }
        }
        Formula::Imp(l, r) | Formula::Iff(l, r) => distribution_weight(l, nf)
            .saturating_add(distribution_weight(r, nf))
            .saturating_add(1),
    }
}

pub fn measure(f: &Formula, nf: NormalForm) -> Measure {
    Measure {
        equivalences: count(f, &is_iff),
        implications: count(f, &is_imp),
        negation_weight: negation_weight(f),
        distribution_weight: distribution_weight(f, nf),
        size: f.size(),
        interior_annihilators: interior_annihilators(f).len(),
        redex_gap: closest_redex_pair(f).map_or(usize::MAX, |b| b.0),
    }
}

/// Runs the normal-form strategy to completion.
pub fn solve_normal_form(start: &Formula, nf: NormalForm) -> DerivationState {
    let mut state = DerivationState::new(nf, start.clone());
    let mut head = start.clone();
    while state.steps.len() < STEP_LIMIT {
        let Some(a) = strategy_step(&head, nf) else {
            break;
        };
        head = a.after.clone();
        state.steps.push(Step::Rule(a));
    }
    state
}

// ---- canonical DNF for proofs ----

fn literal_key(f: &Formula) -> (&str, bool) {
    match f {
        Formula::Atom(a) => (a, false),
        Formula::Not(inner) => match &**inner {
            Formula::Atom(a) => (a, true),
            _ => ("", true),
        },
        _ => ("", false),
    }
}

fn clause_key(c: &Formula) -> Vec<(&str, bool)> {
    match c {
        Formula::And(ops) => ops.iter().map(literal_key).collect(),
        other => vec![literal_key(other)],
    }
}

fn is_complement_pair(f: &Formula) -> bool {
    match f {
        Formula::Or(ops) if ops.len() == 2 => {
            matches!(ops[0], Formula::Atom(_)) && negation_of(&ops[1], &ops[0])
        }
        _ => false,
    }
}

// A clause in the middle of a minterm expansion: literals followed by `T`
// or by `a \/ ~a`.
fn expanding_clause(c: &Formula) -> bool {
    match c {
        Formula::And(ops) => {
            let (last, init) = ops.split_last().unwrap();
            init.iter().all(Formula::is_literal)
                && (*last == Formula::True || is_complement_pair(last))
        }
        _ => false,
    }
}

fn clauses(f: &Formula) -> Vec<(Position, &Formula)> {
    match f {
        Formula::Or(ops) => ops
            .iter()
            .enumerate()
            .map(|(i, c)| (Position::at(vec![i]), c))
            .collect(),
        other => vec![(Position::root(), other)],
    }
}

fn literal_clause(c: &Formula) -> bool {
    c.is_literal() || matches!(c, Formula::And(ops) if ops.iter().all(Formula::is_literal))
}

/// The formula is partway through the canonical expansion, where the
/// normal-form strategy would undo the expansion.
pub fn expansion_pending(f: &Formula) -> bool {
    if is_complement_pair(f) {
        return true;
    }
    let cs = clauses(f);
    cs.iter().any(|(_, c)| expanding_clause(c))
        && cs.iter().all(|(_, c)| expanding_clause(c) || literal_clause(c))
}

fn clause_atoms(c: &Formula) -> Vec<&str> {
    let ops: Vec<&Formula> = match c {
        Formula::And(ops) => ops.iter().collect(),
        other => vec![other],
    };
    ops.into_iter()
        .filter(|o| o.is_literal())
        .map(|o| literal_key(o).0)
        .collect()
}

fn canonical_step(f: &Formula, atoms: &[String]) -> Option<RuleApplication> {
    let none = Bindings::new();
    let with_atom = |a: &str| Bindings::new().with_var(PHI, Formula::atom(a));
    match f {
        Formula::True => {
            let a = atoms.first()?;
            return app(rule("complement-or"), 0, RTL, f, &Position::root(), &with_atom(a));
        }
        Formula::False => return None,
        _ => {}
    }
    let cs = clauses(f);
    // c ~> c /\ T ~> c /\ (a \/ ~a) ~> (c /\ a) \/ (c /\ ~a); an expansion
    // in progress is finished first
    for (pos, c) in &cs {
        let Formula::And(ops) = c else { continue };
        let n = ops.len();
        if ops[n - 1] == Formula::True {
            let t_pos = pos.child(n - 1);
            return match missing_atom(c, atoms) {
                Some(a) => app(rule("complement-or"), 0, RTL, f, &t_pos, &with_atom(a)),
                None => app(rule("true-and"), 0, LTR, f, pos, &none),
            };
        }
        if is_complement_pair(&ops[n - 1]) {
            return app(rule("distr-and-over-or"), 0, LTR, f, pos, &none);
        }
    }
    // literal order inside each clause
    for (pos, c) in &cs {
        if let Formula::And(ops) = c {
            if let Some(k) =
                (0..ops.len() - 1).find(|&k| literal_key(&ops[k]) > literal_key(&ops[k + 1]))
            {
                let at = if ops.len() == 2 {
                    pos.clone()
                } else {
                    Position::span(pos.path.clone(), k, 2)
                };
                return app(rule("comm-and"), 0, LTR, f, &at, &none);
            }
        }
    }
    // clause order, merging duplicates
    if let Formula::Or(ops) = f {
        let at = |k: usize| {
            if ops.len() == 2 {
                Position::root()
            } else {
                Position::span(vec![], k, 2)
            }
        };
        for k in 0..ops.len() - 1 {
            if ops[k] == ops[k + 1] {
                return app(rule("idempotency-or"), 0, LTR, f, &at(k), &none);
            }
            if clause_key(&ops[k]) > clause_key(&ops[k + 1]) {
                return app(rule("comm-or"), 0, LTR, f, &at(k), &none);
            }
        }
    }
    // start expanding the first clause that lacks an atom
    let (pos, _) = cs.iter().find(|(_, c)| missing_atom(c, atoms).is_some())?;
    app(rule("true-and"), 0, RTL, f, pos, &none)
}

fn missing_atom<'a>(c: &Formula, atoms: &'a [String]) -> Option<&'a str> {
    let present = clause_atoms(c);
    atoms
        .iter()
        .map(String::as_str)
        .find(|a| !present.contains(a))
}

/// Rule relation of the canonical phase, for on-path checks.
pub fn is_canonical_rule(id: &str, dir: RuleDirection) -> bool {
    match dir {
        RuleDirection::LeftToRight => matches!(
            id,
            "distr-and-over-or" | "comm-and" | "comm-or" | "idempotency-or" | "true-and"
        ),
        RuleDirection::RightToLeft => matches!(id, "true-and" | "complement-or" | "comm-and" | "comm-or"),
    }
}

/// One step of a proof side towards the meeting point.
pub fn proof_side_step(f: &Formula, atoms: &[String]) -> Option<RuleApplication> {
    if expansion_pending(f) {
        return canonical_step(f, atoms);
    }
    strategy_step(f, NormalForm::Dnf).or_else(|| canonical_step(f, atoms))
}

// One side of a proof search: the states reached so far and where each
// was first seen.
struct Side {
    head: Formula,
    apps: Vec<RuleApplication>,
    seen: HashMap<Formula, usize>,
    done: bool,
}

impl Side {
    fn new(start: &Formula) -> Self {
        Side {
            head: start.clone(),
            apps: Vec::new(),
            seen: HashMap::from([(start.clone(), 0)]),
            done: false,
        }
    }

    // Takes one step; returns the new head.
    fn advance(&mut self, atoms: &[String]) -> Option<&Formula> {
        if self.done {
            return None;
        }
        let Some(a) = proof_side_step(&self.head, atoms) else {
            self.done = true;
            return None;
        };
        self.head = a.after.clone();
        self.apps.push(a);
        self.seen.entry(self.head.clone()).or_insert(self.apps.len());
        Some(&self.head)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("the formulas are not equivalent (counterexample: {0:?})")]
    NotEquivalent(Valuation),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("no common formula within {STEP_LIMIT} steps")]
    NoMeeting,
}

/// A closed proof: a forward chain from `lhs` and a backward chain from
/// `rhs` that end in the same formula.
pub fn solve_proof(lhs: &Formula, rhs: &Formula) -> Result<ProofState, ProofError> {
    if let Some(v) = counterexample(lhs, rhs)? {
        return Err(ProofError::NotEquivalent(v));
    }
    let mut atoms: Vec<String> = lhs.atoms().into_iter().collect();
    atoms.extend(rhs.atoms());
    atoms.sort();
    atoms.dedup();
    // both sides advance in turn until one reaches a state the other
    // has seen
    let (mut a, mut b) = (Side::new(lhs), Side::new(rhs));
    let mut meeting = (lhs == rhs).then_some((0, 0));
    while meeting.is_none() && a.apps.len() + b.apps.len() < STEP_LIMIT {
        if let Some(h) = a.advance(&atoms) {
            if let Some(&j) = b.seen.get(h) {
                meeting = Some((a.apps.len(), j));
                break;
            }
        }
        if let Some(h) = b.advance(&atoms) {
            if let Some(&i) = a.seen.get(h) {
                meeting = Some((i, b.apps.len()));
                break;
            }
        }
        if a.done && b.done {
            break;
        }
    }
    let (i, j) = meeting.ok_or(ProofError::NoMeeting)?;
    let (ta, tb) = (a.apps, b.apps);
    Ok(ProofState {
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        forward: ta.into_iter().take(i).map(Step::Rule).collect(),
        backward: tb.into_iter().take(j).map(Step::Rule).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn trace(d: &DerivationState) -> Vec<(String, String)> {
        d.steps
            .iter()
            .map(|s| (s.rule_id().unwrap().to_string(), s.after().to_string()))
            .collect()
    }

    #[test]
    fn normal_form_predicates() {
        assert!(is_dnf(&p("(q /\\ ~r) \\/ q \\/ r")));
        assert!(!is_dnf(&p("~(p \\/ q)")));
        assert!(is_dnf(&p("T")) && is_cnf(&p("T")));
        assert!(is_cnf(&p("(p \\/ q) /\\ ~r")));
        assert!(!is_cnf(&p("(p /\\ q) \\/ r")));
    }

    #[test]
    fn worked_example_passes_through_the_unsimplified_form() {
        let d = solve_normal_form(&p("~(q -> r) \\/ q \\/ r"), NormalForm::Dnf);
        let t = trace(&d);
        assert_eq!(t.len(), 4);
        assert_eq!(t[2].1, "(q /\\ ~r) \\/ q \\/ r");
        assert_eq!(t[3].0, "absorption-or");
        assert_eq!(d.head(), &p("q \\/ r"));
    }

    #[test]
    fn implication_to_dnf_is_one_step() {
        let d = solve_normal_form(&p("p -> q"), NormalForm::Dnf);
        assert_eq!(trace(&d), vec![("impl-def".to_string(), "~p \\/ q".to_string())]);
        assert!(solve_normal_form(&p("p"), NormalForm::Cnf).steps.is_empty());
    }

    #[test]
    fn distant_duplicates_are_brought_together() {
        let d = solve_normal_form(&p("p \\/ q \\/ r \\/ p"), NormalForm::Dnf);
        assert_eq!(d.head(), &p("p \\/ q \\/ r"));
        assert!(d.steps.iter().any(|s| s.rule_id() == Some("comm-or")));
    }

    #[test]
    fn cnf_distributes_disjunction() {
        let d = solve_normal_form(&p("(p /\\ q) \\/ r"), NormalForm::Cnf);
        assert_eq!(d.head(), &p("(p \\/ r) /\\ (q \\/ r)"));
    }

    #[test]
    fn measure_decreases_along_solutions() {
        for text in [
            "(p <-> q) <-> r",
            "~((p -> q) /\\ ~(r \\/ ~p))",
            "(p \\/ q) /\\ (r \\/ s) /\\ ~p",
        ] {
            for nf in [NormalForm::Dnf, NormalForm::Cnf] {
                let d = solve_normal_form(&p(text), nf);
                assert!(d.is_finished(), "{text}");
                for s in &d.steps {
                    assert!(measure(s.after(), nf) < measure(s.before(), nf), "{text}: {s:?}");
                }
            }
        }
    }

    #[test]
    fn minimal_proof_is_one_backward_step() {
        let proof = solve_proof(&p("p"), &p("~~p")).unwrap();
        assert!(proof.forward.is_empty());
        assert_eq!(proof.backward.len(), 1);
        assert_eq!(proof.backward[0].rule_id(), Some("double-negation"));
        assert!(proof.is_closed());
    }

    #[test]
    fn contraposition_meets_at_the_implication_form() {
        let proof = solve_proof(&p("p -> q"), &p("~q -> ~p")).unwrap();
        assert!(proof.is_closed());
        assert_eq!(proof.forward_head(), &p("~p \\/ q"));
    }

    #[test]
    fn tautology_proof_closes_on_t() {
        let proof = solve_proof(&p("(p -> q) \\/ (q -> p)"), &p("T")).unwrap();
        assert!(proof.is_closed());
        assert!(proof.backward.is_empty());
    }

    #[test]
    fn canonical_phase_closes_differing_simplified_forms() {
        let proof = solve_proof(&p("p \\/ (~p /\\ q)"), &p("p \\/ q")).unwrap();
        assert!(proof.is_closed());
    }

    #[test]
    fn inequivalent_proof_is_refused() {
        assert!(matches!(
            solve_proof(&p("p"), &p("q")),
            Err(ProofError::NotEquivalent(_))
        ));
    }
}
