use thiserror::Error;

/// Errors raised by the kernel, the state constructors and the bound computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid state: not positive (minimum eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("invalid state: trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("degenerate branch: selection probability {0:e} is below the cutoff")]
    DegenerateBranch(f64),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Internal(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
