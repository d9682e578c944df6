use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),

    /// A configuration value failed validation; `key` is the dotted path.
    #[error("invalid configuration at `{key}`: {msg}")]
    ConfigKey { key: String, msg: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("solution diverged at step {step}")]
    Diverged { step: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SolverError {
    pub(crate) fn key(key: impl Into<String>, msg: impl Into<String>) -> Self {
        SolverError::ConfigKey {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// True for errors that originate in user configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, SolverError::Config(_) | SolverError::ConfigKey { .. })
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
