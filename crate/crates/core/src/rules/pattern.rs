//! Schematic formulas and matching modulo implicit associativity.
//!
//! A metavariable inside an `And`/`Or` pattern may absorb a contiguous run
//! of operands, which it then binds to the virtual node built from that run.
//! `Each` stands for a whole operand list of unknown length (generalized
//! DeMorgan and distribution) and is instantiated once per element.

use std::collections::BTreeMap;
use std::fmt;

use crate::formula::{Connective, Formula};

/// Index of a metavariable: 0 = φ, 1 = ψ, 2 = χ.
pub type Meta = usize;

pub const PHI: Meta = 0;
pub const PSI: Meta = 1;
pub const CHI: Meta = 2;

const GREEK: [&str; 3] = ["φ", "ψ", "χ"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Meta),
    /// The current element inside an `Each`.
    Item,
    True,
    False,
    Not(Box<Pattern>),
    And(Vec<Pattern>),
    Or(Vec<Pattern>),
    /// Only valid as the sole element of an `And`/`Or` pattern.
    Each(Meta, Box<Pattern>),
    Imp(Box<Pattern>, Box<Pattern>),
    Iff(Box<Pattern>, Box<Pattern>),
}

pub mod build {
    use super::*;

    pub fn var(m: Meta) -> Pattern {
        Pattern::Var(m)
    }
    pub fn phi() -> Pattern {
        Pattern::Var(PHI)
    }
    pub fn psi() -> Pattern {
        Pattern::Var(PSI)
    }
    pub fn chi() -> Pattern {
        Pattern::Var(CHI)
    }
    pub fn item() -> Pattern {
        Pattern::Item
    }
    pub fn t() -> Pattern {
        Pattern::True
    }
    pub fn f() -> Pattern {
        Pattern::False
    }
    pub fn not(p: Pattern) -> Pattern {
        Pattern::Not(Box::new(p))
    }
    pub fn and(a: Pattern, b: Pattern) -> Pattern {
        Pattern::And(vec![a, b])
    }
    pub fn or(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Or(vec![a, b])
    }
    pub fn and_each(list: Meta, inner: Pattern) -> Pattern {
        Pattern::And(vec![Pattern::Each(list, Box::new(inner))])
    }
    pub fn or_each(list: Meta, inner: Pattern) -> Pattern {
        Pattern::Or(vec![Pattern::Each(list, Box::new(inner))])
    }
    pub fn imp(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Imp(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Iff(Box::new(a), Box::new(b))
    }
}

/// Metavariable assignment produced by matching.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    vars: BTreeMap<Meta, Formula>,
    lists: BTreeMap<Meta, Vec<Formula>>,
    item: Option<Formula>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, m: Meta, f: Formula) -> Self {
        self.vars.insert(m, f);
        self
    }

    pub fn with_list(mut self, m: Meta, fs: Vec<Formula>) -> Self {
        self.lists.insert(m, fs);
        self
    }

    pub fn var(&self, m: Meta) -> Option<&Formula> {
        self.vars.get(&m)
    }

    pub fn list(&self, m: Meta) -> Option<&[Formula]> {
        self.lists.get(&m).map(Vec::as_slice)
    }

    /// Adds the entries of `other` that are not already bound here.
    pub fn merged(mut self, other: &Bindings) -> Self {
        for (k, v) in &other.vars {
            self.vars.entry(*k).or_insert_with(|| v.clone());
        }
        for (k, v) in &other.lists {
            self.lists.entry(*k).or_insert_with(|| v.clone());
        }
        self
    }
}

fn bind(slot: Option<&Formula>, f: &Formula) -> Option<bool> {
    // Some(true): consistent with an existing binding; Some(false): conflict; None: free
    slot.map(|bound| bound == f)
}

impl Pattern {
    /// All ways the pattern matches `f`, extending `b`.
    pub fn matches(&self, f: &Formula, b: &Bindings) -> Vec<Bindings> {
        let mut out = Vec::new();
        self.match_into(f, b.clone(), &mut out);
        out
    }

    fn match_into(&self, f: &Formula, mut b: Bindings, out: &mut Vec<Bindings>) {
        match self {
            Pattern::Var(m) => match bind(b.vars.get(m), f) {
                Some(true) => out.push(b),
                Some(false) => {}
                None => {
                    b.vars.insert(*m, f.clone());
                    out.push(b);
                }
            },
            Pattern::Item => match bind(b.item.as_ref(), f) {
                Some(true) => out.push(b),
                Some(false) => {}
                None => {
                    b.item = Some(f.clone());
                    out.push(b);
                }
            },
            Pattern::True => {
                if *f == Formula::True {
                    out.push(b)
                }
            }
            Pattern::False => {
                if *f == Formula::False {
                    out.push(b)
                }
            }
            Pattern::Not(p) => {
                if let Formula::Not(c) = f {
                    p.match_into(c, b, out)
                }
            }
            Pattern::Imp(pl, pr) | Pattern::Iff(pl, pr) => {
                let (l, r) = match (self, f) {
                    (Pattern::Imp(..), Formula::Imp(l, r)) | (Pattern::Iff(..), Formula::Iff(l, r)) => {
                        (l, r)
                    }
                    _ => return,
                };
                let mut left = Vec::new();
                pl.match_into(l, b, &mut left);
                for lb in left {
                    pr.match_into(r, lb, out);
                }
            }
            Pattern::And(elems) | Pattern::Or(elems) => {
                let conn = if matches!(self, Pattern::And(_)) {
                    Connective::And
                } else {
                    Connective::Or
                };
                if f.connective() != Some(conn) {
                    return;
                }
                let ops = f.operands().unwrap();
                if let [Pattern::Each(list, inner)] = elems.as_slice() {
                    match_each(*list, inner, ops, b, out);
                } else {
                    match_runs(conn, elems, ops, b, out);
                }
            }
            Pattern::Each(..) => unreachable!("Each outside an operand list"),
        }
    }

    /// Builds the formula this pattern denotes under `b`; `None` when a
    /// metavariable is unbound.
    pub fn instantiate(&self, b: &Bindings) -> Option<Formula> {
        Some(match self {
            Pattern::Var(m) => b.vars.get(m)?.clone(),
            Pattern::Item => b.item.clone()?,
            Pattern::True => Formula::True,
            Pattern::False => Formula::False,
            Pattern::Not(p) => Formula::not(p.instantiate(b)?),
            Pattern::Imp(l, r) => Formula::imp(l.instantiate(b)?, r.instantiate(b)?),
            Pattern::Iff(l, r) => Formula::iff(l.instantiate(b)?, r.instantiate(b)?),
            Pattern::And(elems) | Pattern::Or(elems) => {
                let mut ops = Vec::new();
                for e in elems {
                    if let Pattern::Each(list, inner) = e {
                        for it in b.lists.get(list)? {
                            let mut ib = b.clone();
                            ib.item = Some(it.clone());
                            ops.push(inner.instantiate(&ib)?);
                        }
                    } else {
                        ops.push(e.instantiate(b)?);
                    }
                }
                if matches!(self, Pattern::And(_)) {
                    Formula::and(ops)
                } else {
                    Formula::or(ops)
                }
            }
            Pattern::Each(..) => return None,
        })
    }

    /// Metavariables (and list metavariables) occurring in the pattern.
    pub fn metas(&self) -> (Vec<Meta>, Vec<Meta>) {
        let mut vars = Vec::new();
        let mut lists = Vec::new();
        self.collect_metas(&mut vars, &mut lists);
        vars.sort_unstable();
        vars.dedup();
        lists.sort_unstable();
        lists.dedup();
        (vars, lists)
    }

    /// Occurrences of the metavariable `m`.
    pub fn count_var(&self, m: Meta) -> usize {
        match self {
            Pattern::Var(v) => usize::from(*v == m),
            Pattern::Item | Pattern::True | Pattern::False => 0,
            Pattern::Not(p) | Pattern::Each(_, p) => p.count_var(m),
            Pattern::And(es) | Pattern::Or(es) => es.iter().map(|e| e.count_var(m)).sum(),
            Pattern::Imp(l, r) | Pattern::Iff(l, r) => l.count_var(m) + r.count_var(m),
        }
    }

    fn collect_metas(&self, vars: &mut Vec<Meta>, lists: &mut Vec<Meta>) {
        match self {
            Pattern::Var(m) => vars.push(*m),
            Pattern::Item | Pattern::True | Pattern::False => {}
            Pattern::Not(p) => p.collect_metas(vars, lists),
            Pattern::And(es) | Pattern::Or(es) => {
                for e in es {
                    e.collect_metas(vars, lists)
                }
            }
            Pattern::Each(l, inner) => {
                lists.push(*l);
                inner.collect_metas(vars, lists);
            }
            Pattern::Imp(l, r) | Pattern::Iff(l, r) => {
                l.collect_metas(vars, lists);
                r.collect_metas(vars, lists);
            }
        }
    }

    /// Swaps the operands of every binary `conn` node (used to derive the
    /// right-hand side of a commutative variant).
    pub fn mirrored(&self, conn: Connective) -> Pattern {
        let m = |p: &Pattern| p.mirrored(conn);
        match self {
            Pattern::Var(_) | Pattern::Item | Pattern::True | Pattern::False => self.clone(),
            Pattern::Not(p) => Pattern::Not(Box::new(m(p))),
            Pattern::Imp(l, r) => Pattern::Imp(Box::new(m(l)), Box::new(m(r))),
            Pattern::Iff(l, r) => Pattern::Iff(Box::new(m(l)), Box::new(m(r))),
            Pattern::Each(l, inner) => Pattern::Each(*l, Box::new(m(inner))),
            Pattern::And(es) | Pattern::Or(es) => {
                let mut es: Vec<Pattern> = es.iter().map(m).collect();
                let this = if matches!(self, Pattern::And(_)) {
                    Connective::And
                } else {
                    Connective::Or
                };
                if this == conn && es.len() == 2 {
                    es.swap(0, 1);
                }
                match this {
                    Connective::And => Pattern::And(es),
                    Connective::Or => Pattern::Or(es),
                }
            }
        }
    }

    /// Top connective and operands when this is a plain binary And/Or.
    pub fn binary_top(&self) -> Option<(Connective, &Pattern, &Pattern)> {
        match self {
            Pattern::And(es) if es.len() == 2 && !matches!(es[0], Pattern::Each(..)) => {
                Some((Connective::And, &es[0], &es[1]))
            }
            Pattern::Or(es) if es.len() == 2 && !matches!(es[0], Pattern::Each(..)) => {
                Some((Connective::Or, &es[0], &es[1]))
            }
            _ => None,
        }
    }

    /// Renames metavariables in order of first occurrence; two rule sides
    /// are the same schema up to renaming iff their canonical forms agree.
    pub fn canonical_pair(lhs: &Pattern, rhs: &Pattern) -> (Pattern, Pattern) {
        let mut map = BTreeMap::new();
        let l = lhs.renamed(&mut map);
        let r = rhs.renamed(&mut map);
        (l, r)
    }

    fn renamed(&self, map: &mut BTreeMap<Meta, Meta>) -> Pattern {
        let fresh = |m: Meta, map: &mut BTreeMap<Meta, Meta>| {
            let n = map.len();
            *map.entry(m).or_insert(n)
        };
        match self {
            Pattern::Var(m) => Pattern::Var(fresh(*m, map)),
            Pattern::Item | Pattern::True | Pattern::False => self.clone(),
            Pattern::Not(p) => Pattern::Not(Box::new(p.renamed(map))),
            Pattern::Imp(l, r) => {
                let l = l.renamed(map);
                Pattern::Imp(Box::new(l), Box::new(r.renamed(map)))
            }
            Pattern::Iff(l, r) => {
                let l = l.renamed(map);
                Pattern::Iff(Box::new(l), Box::new(r.renamed(map)))
            }
            Pattern::Each(l, inner) => {
                let l = fresh(*l, map);
                Pattern::Each(l, Box::new(inner.renamed(map)))
            }
            Pattern::And(es) => Pattern::And(es.iter().map(|e| e.renamed(map)).collect()),
            Pattern::Or(es) => Pattern::Or(es.iter().map(|e| e.renamed(map)).collect()),
        }
    }
}

fn match_each(list: Meta, inner: &Pattern, ops: &[Formula], b: Bindings, out: &mut Vec<Bindings>) {
    let mut states: Vec<(Bindings, Vec<Formula>)> = vec![(b, Vec::new())];
    for op in ops {
        let mut next = Vec::new();
        for (sb, items) in states {
            let mut trial = sb;
            trial.item = None;
            let mut found = Vec::new();
            inner.match_into(op, trial, &mut found);
            for mut fb in found {
                let Some(it) = fb.item.take() else { continue };
                let mut items = items.clone();
                items.push(it);
                next.push((fb, items));
            }
        }
        if next.is_empty() {
            return;
        }
        states = next;
    }
    for (mut sb, items) in states {
        match sb.lists.get(&list) {
            Some(bound) if *bound != items => continue,
            Some(_) => {}
            None => {
                sb.lists.insert(list, items);
            }
        }
        out.push(sb);
    }
}

fn match_runs(
    conn: Connective,
    elems: &[Pattern],
    ops: &[Formula],
    b: Bindings,
    out: &mut Vec<Bindings>,
) {
    let Some((first, rest)) = elems.split_first() else {
        if ops.is_empty() {
            out.push(b);
        }
        return;
    };
    if ops.len() < elems.len() {
        return;
    }
    let max_run = ops.len() - rest.len();
    let is_run = |p: &Pattern| matches!(p, Pattern::Var(_) | Pattern::Item);
    // non-variable elements take exactly one operand each
    if !rest.is_empty() && !rest.iter().any(is_run) {
        let mut tails = Vec::new();
        match_runs(conn, rest, &ops[max_run..], b, &mut tails);
        for tb in tails {
            match_runs(conn, std::slice::from_ref(first), &ops[..max_run], tb, out);
        }
        return;
    }
    let runs = match (first, rest) {
        _ if rest.is_empty() => max_run..=max_run,
        // the same variable twice splits the operands in half
        (Pattern::Var(a), [Pattern::Var(b)]) if a == b => {
            if ops.len() % 2 != 0 {
                return;
            }
            ops.len() / 2..=ops.len() / 2
        }
        _ => 1..=max_run,
    };
    for run in runs {
        let target = if run == 1 {
            ops[0].clone()
        } else if matches!(first, Pattern::Var(_) | Pattern::Item) {
            conn.build(ops[..run].iter().cloned())
        } else {
            continue;
        };
        let mut heads = Vec::new();
        first.match_into(&target, b.clone(), &mut heads);
        for hb in heads {
            match_runs(conn, rest, &ops[run..], hb, out);
        }
    }
}

struct Schema<'a> {
    p: &'a Pattern,
    index: Option<&'a str>,
}

fn compound(p: &Pattern) -> bool {
    matches!(
        p,
        Pattern::And(_) | Pattern::Or(_) | Pattern::Imp(..) | Pattern::Iff(..)
    )
}

fn write_operand(f: &mut fmt::Formatter<'_>, p: &Pattern, index: Option<&str>) -> fmt::Result {
    let s = Schema { p, index };
    if compound(p) {
        write!(f, "({s})")
    } else {
        write!(f, "{s}")
    }
}

impl fmt::Display for Schema<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let index = self.index;
        match self.p {
            Pattern::Var(m) => write!(f, "{}", GREEK[*m]),
            Pattern::Item => write!(f, "{}", index.unwrap_or("ᵢ")),
            Pattern::True => write!(f, "T"),
            Pattern::False => write!(f, "F"),
            Pattern::Not(p) => {
                write!(f, "¬")?;
                write_operand(f, p, index)
            }
            Pattern::Imp(l, r) | Pattern::Iff(l, r) => {
                write_operand(f, l, index)?;
                write!(f, "{}", if matches!(self.p, Pattern::Imp(..)) { " → " } else { " ↔ " })?;
                write_operand(f, r, index)
            }
            Pattern::And(es) | Pattern::Or(es) => {
                let sep = if matches!(self.p, Pattern::And(_)) { " ∧ " } else { " ∨ " };
                if let [Pattern::Each(l, inner)] = es.as_slice() {
                    let name = GREEK[*l];
                    let first = format!("{name}1");
                    let last = format!("{name}n");
                    write_operand(f, inner, Some(&first))?;
                    write!(f, "{sep}…{sep}")?;
                    write_operand(f, inner, Some(&last))
                } else {
                    for (i, e) in es.iter().enumerate() {
                        if i > 0 {
                            write!(f, "{sep}")?;
                        }
                        write_operand(f, e, index)?;
                    }
                    Ok(())
                }
            }
            Pattern::Each(..) => write!(f, "…"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Schema { p: self, index: None })
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use crate::parse::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn variables_bind_consistently() {
        let pat = or(phi(), not(phi()));
        assert_eq!(pat.matches(&p("q \\/ ~q"), &Bindings::new()).len(), 1);
        assert!(pat.matches(&p("q \\/ ~r"), &Bindings::new()).is_empty());
    }

    #[test]
    fn variables_absorb_operand_runs() {
        // φ ∨ (φ ∧ ψ) against (a ∧ b) ∨ (a ∧ b ∧ c)
        let pat = or(phi(), and(phi(), psi()));
        let bs = pat.matches(&p("(a /\\ b) \\/ (a /\\ b /\\ c)"), &Bindings::new());
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].var(PHI), Some(&p("a /\\ b")));
        assert_eq!(bs[0].var(PSI), Some(&p("c")));
    }

    #[test]
    fn each_matches_whole_lists() {
        let pat = not(and_each(PHI, item()));
        let bs = pat.matches(&p("~(p /\\ q /\\ r)"), &Bindings::new());
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].list(PHI).unwrap().len(), 3);
        let rhs = or_each(PHI, not(item()));
        assert_eq!(rhs.instantiate(&bs[0]).unwrap(), p("~p \\/ ~q \\/ ~r"));
        // and in reverse
        let back = rhs.matches(&p("~p \\/ ~q \\/ ~r"), &Bindings::new());
        assert_eq!(pat.instantiate(&back[0]).unwrap(), p("~(p /\\ q /\\ r)"));
    }

    #[test]
    fn each_with_shared_variable() {
        let rhs = or_each(PSI, and(phi(), item()));
        let bs = rhs.matches(&p("(a /\\ b /\\ c) \\/ (a /\\ b /\\ d)"), &Bindings::new());
        let phis: Vec<_> = bs.iter().map(|b| b.var(PHI).unwrap().to_string()).collect();
        assert!(phis.contains(&"a".to_string()));
        assert!(phis.contains(&"a /\\ b".to_string()));
    }

    #[test]
    fn mirrored_variant_of_distribution() {
        let rhs = or_each(PSI, and(phi(), item()));
        assert_eq!(
            rhs.mirrored(Connective::And),
            or_each(PSI, and(item(), phi()))
        );
    }

    #[test]
    fn schema_text() {
        let lhs = and(phi(), or_each(PSI, item()));
        let rhs = or_each(PSI, and(phi(), item()));
        assert_eq!(lhs.to_string(), "φ ∧ (ψ1 ∨ … ∨ ψn)");
        assert_eq!(rhs.to_string(), "(φ ∧ ψ1) ∨ … ∨ (φ ∧ ψn)");
    }

    #[test]
    fn canonical_pairs_detect_renamings() {
        let a = Pattern::canonical_pair(&and(phi(), psi()), &and(psi(), phi()));
        let b = Pattern::canonical_pair(&and(psi(), phi()), &and(phi(), psi()));
        assert_eq!(a, b);
    }
}
