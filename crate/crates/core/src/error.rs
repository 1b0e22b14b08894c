use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit {0} appears more than once")]
    RepeatedSite(usize),

    #[error("qubit {site} outside register of {n_qubits} qubits")]
    InvalidSite { site: usize, n_qubits: usize },

    #[error("outcome has {found} bits but {expected} qubits are measured")]
    OutcomeLength { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("{what} = {value} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that signal an infeasible request rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
