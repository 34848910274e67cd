use thiserror::Error;

/// Errors raised by the library.
///
/// `Input` covers contract violations by the caller (bad shapes, non-Hermitian
/// data, invalid parameters). `Numerical` covers solver failures on inputs that
/// were otherwise valid.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not CPTP: completeness residual {0:.3e}")]
    NotTracePreserving(f64),

    #[error("not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for caller-side errors, false for solver failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
