use thiserror::Error;

/// Errors raised across the calculus.
///
/// Every variant maps onto one of the documented process exit codes
/// through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, cut-off, decomposition or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input data (non-finite values, mismatched grids, bad indices).
    #[error("input error: {0}")]
    Input(String),

    /// A derivative or evaluation the symbol cannot provide.
    #[error("capability error: {0}")]
    Capability(String),

    /// A seminorm request outside the regularity class of the symbol.
    #[error("class violation: {0}")]
    ClassViolation(String),

    /// A theorem hypothesis rejected by an experiment gate.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A numerical contract (reconstruction, support, tolerance) failed.
    #[error("numerical contract failed: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 config/input, 3 numerical contract, 4 hypothesis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::Capability(_) | Error::ClassViolation(_) => 2,
            Error::Numerical(_) => 3,
            Error::Hypothesis(_) => 4,
        }
    }
}

pub(crate) fn config<S: Into<String>>(msg: S) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn input<S: Into<String>>(msg: S) -> Error {
    Error::Input(msg.into())
}
