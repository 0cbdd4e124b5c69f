//! Service configuration from the environment and a policy file.

use std::path::PathBuf;

use logex_core::exercise::ExerciseError;
use logex_core::policy::FeedbackPolicy;
use logex_core::session::SessionError;
use thiserror::Error;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiConfig {
    pub addr: String,
    /// Exercise file; the shipped sets when absent.
    pub exercises: Option<PathBuf>,
    /// Append-only event log, replayed at start.
    pub log: Option<PathBuf>,
    pub policy: FeedbackPolicy,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            addr: DEFAULT_ADDR.to_string(),
            exercises: None,
            log: None,
            policy: FeedbackPolicy::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("policy file: {0}")]
    Policy(#[from] toml::de::Error),
    #[error("exercise file: {0}")]
    Exercises(#[from] ExerciseError),
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("log replay of session `{session}`: {source}")]
    Replay {
        session: String,
        source: SessionError,
    },
}

pub(crate) fn read(path: &PathBuf) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.clone(),
        source,
    })
}

/// Parses policy flags; keys left out keep their default.
///
/// ```toml
/// advisories = false
/// divergenceWarnings = false
/// equivalentStepFeedback = false
/// proofMode = "strict"
/// normalFormMode = "lenient"
/// ```
pub fn policy_from_toml(text: &str) -> Result<FeedbackPolicy, ConfigError> {
    Ok(toml::from_str(text)?)
}

impl ApiConfig {
    /// Reads `LOGEX_ADDR`, `LOGEX_EXERCISES`, `LOGEX_LOG` and
    /// `LOGEX_POLICY` (path of a policy file).
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_vars(|k| std::env::var(k).ok())
    }

    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let set = |k: &str| var(k).filter(|v| !v.trim().is_empty());
        let policy = match set("LOGEX_POLICY") {
            Some(path) => policy_from_toml(&read(&PathBuf::from(path))?)?,
            None => FeedbackPolicy::default(),
        };
        Ok(ApiConfig {
            addr: set("LOGEX_ADDR").unwrap_or_else(|| DEFAULT_ADDR.to_string()),
            exercises: set("LOGEX_EXERCISES").map(PathBuf::from),
            log: set("LOGEX_LOG").map(PathBuf::from),
            policy,
        })
    }
}
