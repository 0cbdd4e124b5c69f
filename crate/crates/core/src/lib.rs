//! Engine for a propositional-logic rewriting tutor.
//!
//! Formulas are parsed into a flattened n-ary AST, student steps are
//! diagnosed against a catalog of standard equivalences and buggy rules,
//! strategies produce hints and worked-out solutions for DNF/CNF and
//! equivalence-proof exercises, and session logs yield learning metrics.

#[cfg(feature = "corpus")]
pub mod corpus;
pub mod diagnose;
pub mod exercise;
pub mod feedforward;
pub mod formula;
pub mod parse;
pub mod policy;
mod print;
pub mod rules;
pub mod session;
pub mod state;
pub mod strategy;

pub use formula::{counterexample, equivalent, Connective, Formula, FormulaError, Position, Span, Valuation};
pub use parse::{parse, SyntaxError};
