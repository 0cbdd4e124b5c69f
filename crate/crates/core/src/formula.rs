//! Propositional formulas with flattened n-ary conjunction and disjunction.
//!
//! `And` and `Or` never contain a direct operand of the same connective, and
//! always hold at least two operands. Operand order is significant: the
//! only identity built into the representation is associativity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Upper bound on distinct atoms accepted by truth-table checks.
pub const MAX_ATOMS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    True,
    False,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("atom `{0}` has no value in the valuation")]
    MissingAtom(String),
    #[error("{0} distinct atoms exceed the truth-table limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("invalid position {0}")]
    InvalidPosition(Position),
}

/// Which of the two n-ary connectives a node uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn dual(self) -> Self {
        match self {
            Connective::And => Connective::Or,
            Connective::Or => Connective::And,
        }
    }

    /// Builds a flattened node of this connective.
    pub fn build(self, ops: impl IntoIterator<Item = Formula>) -> Formula {
        match self {
            Connective::And => Formula::and(ops),
            Connective::Or => Formula::or(ops),
        }
    }
}

fn flatten_into(conn: Connective, ops: impl IntoIterator<Item = Formula>) -> Vec<Formula> {
    let mut out = Vec::new();
    for op in ops {
        match (conn, op) {
            (Connective::And, Formula::And(inner)) | (Connective::Or, Formula::Or(inner)) => {
                out.extend(inner)
            }
            (_, other) => out.push(other),
        }
    }
    out
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Flattened conjunction. An empty list yields `T`, a singleton its element.
    pub fn and(ops: impl IntoIterator<Item = Formula>) -> Self {
        let mut ops = flatten_into(Connective::And, ops);
        match ops.len() {
            0 => Formula::True,
            1 => ops.pop().unwrap(),
            _ => Formula::And(ops),
        }
    }

    /// Flattened disjunction. An empty list yields `F`, a singleton its element.
    pub fn or(ops: impl IntoIterator<Item = Formula>) -> Self {
        let mut ops = flatten_into(Connective::Or, ops);
        match ops.len() {
            0 => Formula::False,
            1 => ops.pop().unwrap(),
            _ => Formula::Or(ops),
        }
    }

    pub fn imp(lhs: Formula, rhs: Formula) -> Self {
        Formula::Imp(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    pub fn connective(&self) -> Option<Connective> {
        match self {
            Formula::And(_) => Some(Connective::And),
            Formula::Or(_) => Some(Connective::Or),
            _ => None,
        }
    }

    /// Operands of an `And`/`Or` node.
    pub fn operands(&self) -> Option<&[Formula]> {
        match self {
            Formula::And(ops) | Formula::Or(ops) => Some(ops),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => Vec::new(),
            Formula::Not(c) => vec![c],
            Formula::And(ops) | Formula::Or(ops) => ops.iter().collect(),
            Formula::Imp(l, r) | Formula::Iff(l, r) => vec![l, r],
        }
    }

    /// Atoms and negated atoms.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_)),
            _ => false,
        }
    }

    /// Re-establishes the flattening invariant everywhere.
    pub fn flatten(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => self.clone(),
            Formula::Not(c) => Formula::not(c.flatten()),
            Formula::And(ops) => Formula::and(ops.iter().map(Formula::flatten)),
            Formula::Or(ops) => Formula::or(ops.iter().map(Formula::flatten)),
            Formula::Imp(l, r) => Formula::imp(l.flatten(), r.flatten()),
            Formula::Iff(l, r) => Formula::iff(l.flatten(), r.flatten()),
        }
    }

    pub fn is_flat(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => true,
            Formula::Not(c) => c.is_flat(),
            Formula::And(ops) => {
                ops.len() >= 2
                    && ops.iter().all(|o| !matches!(o, Formula::And(_)) && o.is_flat())
            }
            Formula::Or(ops) => {
                ops.len() >= 2 && ops.iter().all(|o| !matches!(o, Formula::Or(_)) && o.is_flat())
            }
            Formula::Imp(l, r) | Formula::Iff(l, r) => l.is_flat() && r.is_flat(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        if let Formula::Atom(name) = self {
            out.insert(name.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn evaluate(&self, v: &Valuation) -> Result<bool, FormulaError> {
        Ok(match self {
            Formula::Atom(name) => v
                .get(name)
                .ok_or_else(|| FormulaError::MissingAtom(name.clone()))?,
            Formula::True => true,
            Formula::False => false,
            Formula::Not(c) => !c.evaluate(v)?,
            Formula::And(ops) => {
                let mut all = true;
                for op in ops {
                    all &= op.evaluate(v)?;
                }
                all
            }
            Formula::Or(ops) => {
                let mut any = false;
                for op in ops {
                    any |= op.evaluate(v)?;
                }
                any
            }
            Formula::Imp(l, r) => !l.evaluate(v)? || r.evaluate(v)?,
            Formula::Iff(l, r) => l.evaluate(v)? == r.evaluate(v)?,
        })
    }

    // Evaluation against a bitmask; atoms must all be present in `index`.
    fn eval_mask(&self, index: &HashMap<&str, usize>, mask: u32) -> bool {
        match self {
            Formula::Atom(name) => mask & (1 << index[name.as_str()]) != 0,
            Formula::True => true,
            Formula::False => false,
            Formula::Not(c) => !c.eval_mask(index, mask),
            Formula::And(ops) => ops.iter().all(|o| o.eval_mask(index, mask)),
            Formula::Or(ops) => ops.iter().any(|o| o.eval_mask(index, mask)),
            Formula::Imp(l, r) => !l.eval_mask(index, mask) || r.eval_mask(index, mask),
            Formula::Iff(l, r) => l.eval_mask(index, mask) == r.eval_mask(index, mask),
        }
    }

    /// Exact structural equality, operand order included.
    pub fn structurally_equal(&self, other: &Formula) -> bool {
        self == other
    }

    pub fn subformula_at(&self, pos: &Position) -> Result<Formula, FormulaError> {
        let node = self
            .node_at(&pos.path)
            .ok_or_else(|| FormulaError::InvalidPosition(pos.clone()))?;
        match pos.span {
            None => Ok(node.clone()),
            Some(span) => {
                let conn = node
                    .connective()
                    .ok_or_else(|| FormulaError::InvalidPosition(pos.clone()))?;
                let ops = node.operands().unwrap();
                if span.len == 0 || span.start + span.len > ops.len() {
                    return Err(FormulaError::InvalidPosition(pos.clone()));
                }
                Ok(conn.build(ops[span.start..span.start + span.len].iter().cloned()))
            }
        }
    }

    /// Replaces the selected subformula (or operand range) and re-flattens.
    pub fn replace_at(&self, pos: &Position, g: Formula) -> Result<Formula, FormulaError> {
        // validates the position up front so `replace_path` can assume it
        self.subformula_at(pos)?;
        Ok(replace_path(self, &pos.path, pos.span, g))
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&Formula> {
        let mut node = self;
        for &i in path {
            node = *node.children().get(i)?;
        }
        Some(node)
    }

    /// Every position in leftmost-outermost order: a node, then its proper
    /// operand ranges (longest first), then its children.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.push_positions(&mut path, &mut out);
        out
    }

    fn push_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position::at(path.clone()));
        if let Some(ops) = self.operands() {
            let n = ops.len();
            for len in (2..n).rev() {
                for start in 0..=n - len {
                    out.push(Position::span(path.clone(), start, len));
                }
            }
        }
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i);
            c.push_positions(path, out);
            path.pop();
        }
    }

    /// Every subformula, including the virtual nodes formed by operand ranges.
    pub fn subformulas_with_ranges(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.push_subformulas(&mut out);
        out
    }

    fn push_subformulas(&self, out: &mut Vec<Formula>) {
        out.push(self.clone());
        if let (Some(conn), Some(ops)) = (self.connective(), self.operands()) {
            let n = ops.len();
            for len in 2..n {
                for start in 0..=n - len {
                    out.push(conn.build(ops[start..start + len].iter().cloned()));
                }
            }
        }
        for c in self.children() {
            c.push_subformulas(out);
        }
    }
}

fn replace_path(f: &Formula, path: &[usize], span: Option<Span>, g: Formula) -> Formula {
    let Some((&i, rest)) = path.split_first() else {
        return match span {
            None => g,
            Some(span) => {
                let conn = f.connective().expect("validated span");
                let ops = f.operands().unwrap();
                let mut out: Vec<Formula> = ops[..span.start].to_vec();
                out.push(g);
                out.extend_from_slice(&ops[span.start + span.len..]);
                conn.build(out)
            }
        };
    };
    match f {
        Formula::Not(c) => Formula::not(replace_path(c, rest, span, g)),
        Formula::And(ops) | Formula::Or(ops) => {
            let mut ops = ops.clone();
            ops[i] = replace_path(&ops[i], rest, span, g);
            f.connective().unwrap().build(ops)
        }
        Formula::Imp(l, r) | Formula::Iff(l, r) => {
            let (l, r) = if i == 0 {
                (replace_path(l, rest, span, g), (**r).clone())
            } else {
                ((**l).clone(), replace_path(r, rest, span, g))
            };
            if matches!(f, Formula::Imp(..)) {
                Formula::imp(l, r)
            } else {
                Formula::iff(l, r)
            }
        }
        Formula::Atom(_) | Formula::True | Formula::False => unreachable!("validated path"),
    }
}

/// True iff both formulas agree on every valuation of their joint atoms.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool, FormulaError> {
    Ok(counterexample(a, b)?.is_none())
}

/// A valuation on which `a` and `b` differ, if any.
pub fn counterexample(a: &Formula, b: &Formula) -> Result<Option<Valuation>, FormulaError> {
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    if atoms.len() > MAX_ATOMS {
        return Err(FormulaError::TooManyAtoms(atoms.len()));
    }
    let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    for mask in 0u32..(1u32 << names.len()) {
        if a.eval_mask(&index, mask) != b.eval_mask(&index, mask) {
            let v = names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.to_string(), mask & (1 << i) != 0))
                .collect();
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Assignment of truth values to atom names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation(BTreeMap<String, bool>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, atom: &str) -> Option<bool> {
        self.0.get(atom).copied()
    }

    pub fn set(&mut self, atom: impl Into<String>, value: bool) {
        self.0.insert(atom.into(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, bool)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (String, bool)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<(&'a str, bool)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (&'a str, bool)>>(iter: I) -> Self {
        Valuation(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

/// A contiguous operand range `start..start + len` of an n-ary node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

/// Location of a subformula: a child-index path, optionally narrowed to an
/// operand range of the `And`/`Or` node it reaches.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub path: Vec<usize>,
    #[serde(default)]
    pub span: Option<Span>,
}

impl Position {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn at(path: Vec<usize>) -> Self {
        Position { path, span: None }
    }

    pub fn span(path: Vec<usize>, start: usize, len: usize) -> Self {
        Position {
            path,
            span: Some(Span { start, len }),
        }
    }

    pub fn child(&self, i: usize) -> Self {
        debug_assert!(self.span.is_none());
        let mut path = self.path.clone();
        path.push(i);
        Position::at(path)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.path.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")?;
        if let Some(s) = self.span {
            write!(f, "{{{}..{}}}", s.start, s.start + s.len)?;
        }
        Ok(())
    }
}

// Formulas travel as their printed text in every serialized record.
impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::parse::parse(&text).map_err(serde::de::Error::custom)
    }
}
