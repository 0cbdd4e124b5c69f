//! Fixed exercise sets and user-entered exercises.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formula::{counterexample, Formula};
use crate::parse::{parse, SyntaxError};
use crate::state::{DerivationState, ExerciseState, ProofState};
use crate::strategy::{solve_normal_form, solve_proof, NormalForm};

/// Most distinct atoms an exercise may use.
pub const ATOM_CAP: usize = 8;

/// Longest worked solution allowed for a fixed exercise.
pub const FIXED_STEP_BOUND: usize = 25;

/// Number of exercises per kind in the fixed sets.
pub const FIXED_SET_SIZE: usize = 5;

const FIXED_DATA: &str = include_str!("../data/exercises.jsonl");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExerciseKind {
    ToDnf,
    ToCnf,
    Proof,
}

impl ExerciseKind {
    pub const ALL: [ExerciseKind; 3] = [ExerciseKind::ToDnf, ExerciseKind::ToCnf, ExerciseKind::Proof];

    pub fn normal_form(self) -> Option<NormalForm> {
        match self {
            ExerciseKind::ToDnf => Some(NormalForm::Dnf),
            ExerciseKind::ToCnf => Some(NormalForm::Cnf),
            ExerciseKind::Proof => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExerciseKind::ToDnf => "to-dnf",
            ExerciseKind::ToCnf => "to-cnf",
            ExerciseKind::Proof => "proof",
        }
    }
}

impl std::str::FromStr for ExerciseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "to-dnf" | "dnf" => Ok(ExerciseKind::ToDnf),
            "to-cnf" | "cnf" => Ok(ExerciseKind::ToCnf),
            "proof" => Ok(ExerciseKind::Proof),
            other => Err(format!("unknown exercise kind `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    /// Rubric by worked-solution length.
    pub fn from_length(steps: usize) -> Self {
        match steps {
            0..=3 => Difficulty::Easy,
            4..=7 => Difficulty::Medium,
            _ => Difficulty::Hard,
        }
    }
}

/// A normal-form start formula or a proof pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Proof { lhs: Formula, rhs: Formula },
    Start { formula: Formula },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exercise {
    pub id: String,
    pub kind: ExerciseKind,
    pub difficulty: Difficulty,
    /// Position in the fixed sequence; absent for user exercises.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<usize>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Exercise {
    /// Fresh progress state for this exercise.
    pub fn initial_state(&self) -> ExerciseState {
        match (&self.payload, self.kind.normal_form()) {
            (Payload::Start { formula }, Some(nf)) => {
                ExerciseState::Derivation(DerivationState::new(nf, formula.clone()))
            }
            (Payload::Proof { lhs, rhs }, _) => {
                ExerciseState::Proof(ProofState::new(lhs.clone(), rhs.clone()))
            }
            // a start formula on a proof exercise is rejected by `validate`
            (Payload::Start { formula }, None) => {
                ExerciseState::Proof(ProofState::new(formula.clone(), formula.clone()))
            }
        }
    }

    pub fn atom_count(&self) -> usize {
        match &self.payload {
            Payload::Start { formula } => formula.atoms().len(),
            Payload::Proof { lhs, rhs } => {
                let mut atoms = lhs.atoms();
                atoms.extend(rhs.atoms());
                atoms.len()
            }
        }
    }

    /// Length of the generated worked-out solution.
    pub fn worked_length(&self) -> Result<usize, ExerciseError> {
        match (&self.payload, self.kind.normal_form()) {
            (Payload::Start { formula }, Some(nf)) => Ok(solve_normal_form(formula, nf).steps.len()),
            (Payload::Proof { lhs, rhs }, None) => solve_proof(lhs, rhs)
                .map(|p| p.len())
                .map_err(|e| ExerciseError::Unsolvable(e.to_string())),
            _ => Err(ExerciseError::PayloadMismatch(self.kind)),
        }
    }

    /// Checks payload shape, atom cap, and (for proofs) equivalence.
    pub fn validate(&self) -> Result<(), ExerciseError> {
        let count = self.atom_count();
        if count > ATOM_CAP {
            return Err(ExerciseError::TooManyAtoms { count, cap: ATOM_CAP });
        }
        match (&self.payload, self.kind) {
            (Payload::Proof { lhs, rhs }, ExerciseKind::Proof) => {
                if let Some(v) = counterexample(lhs, rhs).map_err(|e| ExerciseError::Unsolvable(e.to_string()))? {
                    let witness = v
                        .iter()
                        .map(|(a, b)| format!("{a}={}", if b { "T" } else { "F" }))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(ExerciseError::NotEquivalent(witness));
                }
                Ok(())
            }
            (Payload::Start { .. }, ExerciseKind::ToDnf | ExerciseKind::ToCnf) => Ok(()),
            _ => Err(ExerciseError::PayloadMismatch(self.kind)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExerciseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {id}: {source}")]
    Invalid {
        line: usize,
        id: String,
        source: Box<ExerciseError>,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("the two formulas are not equivalent ({0})")]
    NotEquivalent(String),
    #[error("{count} atoms exceed the cap of {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("payload does not fit a {} exercise", .0.as_str())]
    PayloadMismatch(ExerciseKind),
    #[error("no solution: {0}")]
    Unsolvable(String),
    #[error("{0}")]
    Set(String),
}

/// Parses newline-delimited exercise records; blank lines and lines
/// starting with `#` are skipped.
pub fn load_exercises(text: &str) -> Result<Vec<Exercise>, ExerciseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ex: Exercise = serde_json::from_str(line).map_err(|e| ExerciseError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        ex.validate().map_err(|e| ExerciseError::Invalid {
            line: i + 1,
            id: ex.id.clone(),
            source: Box::new(e),
        })?;
        out.push(ex);
    }
    Ok(out)
}

/// Checks a whole exercise file: unique ids, strictly increasing ordinals
/// per kind, and a bounded worked solution for every exercise.
pub fn validate_set(exercises: &[Exercise]) -> Result<(), ExerciseError> {
    let mut ids = std::collections::BTreeSet::new();
    for ex in exercises {
        if !ids.insert(ex.id.as_str()) {
            return Err(ExerciseError::Set(format!("duplicate id `{}`", ex.id)));
        }
        let steps = ex.worked_length()?;
        if steps > FIXED_STEP_BOUND {
            return Err(ExerciseError::Set(format!(
                "`{}` needs {steps} steps (bound {FIXED_STEP_BOUND})",
                ex.id
            )));
        }
    }
    for kind in ExerciseKind::ALL {
        let ords: Vec<usize> = exercises
            .iter()
            .filter(|e| e.kind == kind)
            .filter_map(|e| e.ordinal)
            .collect();
        if ords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExerciseError::Set(format!(
                "ordinals of {} exercises are not increasing",
                kind.as_str()
            )));
        }
    }
    Ok(())
}

/// The shipped exercise sets, in file order.
pub fn fixed_exercises() -> Vec<Exercise> {
    load_exercises(FIXED_DATA).expect("shipped exercise file is valid")
}

/// The fixed, ordered exercises of one kind.
pub fn fixed_set(kind: ExerciseKind) -> Vec<Exercise> {
    let mut set: Vec<Exercise> = fixed_exercises().into_iter().filter(|e| e.kind == kind).collect();
    set.sort_by_key(|e| e.ordinal);
    set
}

/// Hex SHA-256 of exercise file contents; versions the fixed sets.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn fixed_content_hash() -> String {
    content_hash(FIXED_DATA)
}

/// Builds a student-entered exercise; difficulty follows the length of the
/// generated worked solution.
pub fn create_user_exercise(
    id: impl Into<String>,
    kind: ExerciseKind,
    texts: &[&str],
) -> Result<Exercise, ExerciseError> {
    let payload = match (kind, texts) {
        (ExerciseKind::Proof, [l, r]) => Payload::Proof {
            lhs: parse(l)?,
            rhs: parse(r)?,
        },
        (ExerciseKind::ToDnf | ExerciseKind::ToCnf, [f]) => Payload::Start { formula: parse(f)? },
        _ => return Err(ExerciseError::PayloadMismatch(kind)),
    };
    let mut ex = Exercise {
        id: id.into(),
        kind,
        difficulty: Difficulty::Easy,
        ordinal: None,
        payload,
    };
    ex.validate()?;
    ex.difficulty = Difficulty::from_length(ex.worked_length()?);
    Ok(ex)
}
