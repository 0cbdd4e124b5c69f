//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence from tightest to loosest: `~`, `/\`, `\/`, `->` (right
//! associative), `<->` (non-associative). Unicode `¬ ∧ ∨ → ↔` are accepted
//! as aliases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

/// A parse failure with the byte offset of the offending token and a
/// one-line repair suggestion.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("syntax error at offset {offset}: expected {expected}, found {found}; {suggestion}")]
pub struct SyntaxError {
    pub offset: usize,
    pub found: String,
    pub expected: String,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Atom(String),
    True,
    False,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("'{a}'"),
            Tok::True => "'T'".into(),
            Tok::False => "'F'".into(),
            Tok::Not => "'~'".into(),
            Tok::And => "'/\\'".into(),
            Tok::Or => "'\\/'".into(),
            Tok::Imp => "'->'".into(),
            Tok::Iff => "'<->'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Token {
    tok: Tok,
    offset: usize,
}

fn err(offset: usize, found: impl Into<String>, expected: &str, suggestion: &str) -> SyntaxError {
    SyntaxError {
        offset,
        found: found.into(),
        expected: expected.into(),
        suggestion: suggestion.into(),
    }
}

fn lex(input: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut chars = input.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let next = |k: usize| bytes.get(i + k).copied();
        let (tok, width) = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '~' | '¬' => (Tok::Not, c.len_utf8()),
            '∧' => (Tok::And, c.len_utf8()),
            '∨' => (Tok::Or, c.len_utf8()),
            '→' => (Tok::Imp, c.len_utf8()),
            '↔' => (Tok::Iff, c.len_utf8()),
            '/' if next(1) == Some(b'\\') => (Tok::And, 2),
            '\\' if next(1) == Some(b'/') => (Tok::Or, 2),
            '-' if next(1) == Some(b'>') => (Tok::Imp, 2),
            '<' if next(1) == Some(b'-') && next(2) == Some(b'>') => (Tok::Iff, 3),
            '/' => return Err(err(i, "'/'", "an operator", "write conjunction as /\\")),
            '\\' => return Err(err(i, "'\\'", "an operator", "write disjunction as \\/")),
            '&' => return Err(err(i, "'&'", "an operator", "write conjunction as /\\")),
            '|' => return Err(err(i, "'|'", "an operator", "write disjunction as \\/")),
            '!' => return Err(err(i, "'!'", "a formula", "write negation as ~")),
            '=' if next(1) == Some(b'>') => {
                return Err(err(i, "'=>'", "an operator", "write implication as ->"))
            }
            '<' if next(1) == Some(b'=') => {
                return Err(err(i, "'<=>'", "an operator", "write equivalence as <->"))
            }
            '-' | '<' => {
                return Err(err(
                    i,
                    format!("'{c}'"),
                    "an operator",
                    "implication is written -> and equivalence <->",
                ))
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &input[start..end];
                let tok = match word {
                    "T" => Tok::True,
                    "F" => Tok::False,
                    w if w.as_bytes()[0].is_ascii_lowercase() => Tok::Atom(w.to_string()),
                    w => {
                        return Err(err(
                            start,
                            format!("'{w}'"),
                            "a formula",
                            &format!(
                                "atoms start with a lowercase letter (try '{}'); T and F are the constants",
                                w.to_ascii_lowercase()
                            ),
                        ))
                    }
                };
                out.push(Token { tok, offset: start });
                continue;
            }
            c => {
                return Err(err(
                    i,
                    format!("'{c}'"),
                    "a formula or operator",
                    "use atoms, T, F, ~, /\\, \\/, ->, <-> and parentheses",
                ))
            }
        };
        out.push(Token { tok, offset: i });
        for _ in 0..width {
            // `width` counts bytes; step over whole chars
            match chars.peek() {
                Some(&(j, _)) if j < i + width => {
                    chars.next();
                }
                _ => break,
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: input.len(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.imp()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            if *self.peek() == Tok::Iff {
                return Err(err(
                    self.offset(),
                    "'<->'",
                    "end of formula or ')'",
                    "<-> does not chain; add parentheses, e.g. (p <-> q) <-> r",
                ));
            }
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut ops = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            ops.push(self.and()?);
        }
        Ok(Formula::or(ops))
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut ops = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            ops.push(self.unary()?);
        }
        Ok(Formula::and(ops))
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Atom(a) => Ok(Formula::Atom(a)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::LParen => {
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    let found = self.peek().describe();
                    return Err(err(
                        self.offset(),
                        found,
                        &format!("')' to close '(' at offset {offset}"),
                        "add the missing closing parenthesis",
                    ));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Eof => {
                if self.pos == 0 {
                    return Err(err(offset, "end of input", "a formula", "type a formula"));
                }
                let prev = &self.toks[self.pos - 1];
                Err(err(
                    prev.offset,
                    "end of input",
                    &format!("a formula after {}", prev.tok.describe()),
                    "complete the formula or remove the dangling operator",
                ))
            }
            Tok::RParen => Err(err(
                offset,
                "')'",
                "a formula before ')'",
                "fill in the empty parentheses or remove the operator before ')'",
            )),
            t => Err(err(
                offset,
                t.describe(),
                &format!("a formula before {}", t.describe()),
                "an operator needs a formula on both sides",
            )),
        }
    }
}

/// Parses one formula; And/Or chains come out flattened.
pub fn parse(input: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
    };
    let f = p.iff()?;
    match p.peek() {
        Tok::Eof => Ok(f),
        Tok::RParen => Err(err(
            p.offset(),
            "')'",
            "end of formula",
            "this ')' has no matching '('; remove it or add a '(' earlier",
        )),
        t => {
            let found = t.describe();
            Err(err(
                p.offset(),
                found.clone(),
                "an operator",
                &format!("insert an operator such as /\\ or \\/ before {found}"),
            ))
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
