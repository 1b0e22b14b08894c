use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Compute(#[from] deepmix_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for budget caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Budget(_) => 3,
            HarnessError::Compute(e) if e.is_budget() => 3,
            _ => 1,
        }
    }

    /// Validation-time conversion: caps become budget errors, anything else a
    /// config error naming `key`.
    pub(crate) fn from_check(key: &str, e: deepmix_core::Error) -> Self {
        if e.is_budget() {
            HarnessError::Budget(format!("{key}: {e}"))
        } else {
            HarnessError::Config(format!("{key}: {e}"))
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}
