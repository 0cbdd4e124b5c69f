//! ASCII printing.
//!
//! A compound operand of a different binary connective is always
//! parenthesized, so `(q /\ ~r) \/ q \/ r` prints as students write it.
//! Same-connective chains never get inner parentheses.

use std::fmt::{self, Display, Write};

use crate::formula::Formula;

fn is_binary(f: &Formula) -> bool {
    matches!(
        f,
        Formula::And(_) | Formula::Or(_) | Formula::Imp(..) | Formula::Iff(..)
    )
}

fn same_kind(a: &Formula, b: &Formula) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

fn write_operand(out: &mut fmt::Formatter<'_>, parent: &Formula, child: &Formula) -> fmt::Result {
    if is_binary(child) && !same_kind(parent, child) {
        write!(out, "({child})")
    } else {
        write!(out, "{child}")
    }
}

impl Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => out.write_str(a),
            Formula::True => out.write_char('T'),
            Formula::False => out.write_char('F'),
            Formula::Not(c) => {
                if is_binary(c) {
                    write!(out, "~({c})")
                } else {
                    write!(out, "~{c}")
                }
            }
            Formula::And(ops) | Formula::Or(ops) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " /\\ "
                } else {
                    " \\/ "
                };
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        out.write_str(sep)?;
                    }
                    write_operand(out, self, op)?;
                }
                Ok(())
            }
            Formula::Imp(l, r) => {
                // right-associative: only a left-nested implication needs parentheses
                if matches!(**l, Formula::Imp(..)) {
                    write!(out, "({l})")?;
                } else {
                    write_operand(out, self, l)?;
                }
                out.write_str(" -> ")?;
                write_operand(out, self, r)
            }
            Formula::Iff(l, r) => {
                for (i, side) in [l, r].into_iter().enumerate() {
                    if i > 0 {
                        out.write_str(" <-> ")?;
                    }
                    if matches!(**side, Formula::Iff(..)) {
                        write!(out, "({side})")?;
                    } else {
                        write_operand(out, self, side)?;
                    }
                }
                Ok(())
            }
        }
    }
}
