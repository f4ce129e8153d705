use thiserror::Error;

/// Errors surfaced to an agent through the session protocol.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("unknown knowledge-base reference `{0}`")]
    InvalidReference(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("score budget of {budget} calls exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("budget must be at least 1")]
    InvalidBudget,
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("{0}")]
    Input(String),
    #[error("no valid problem found after {attempts} attempts: {reason}")]
    Exhausted { attempts: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed suite: {0}")]
    Format(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl SuiteError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SuiteError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        SuiteError::Json {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
