use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps [`Error::OracleInfeasible`] to exit code 3 and every other
/// contract failure to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid input: {0}")]
    InvalidSpec(String),
    #[error("size {n} exceeds the exact-oracle limit of {limit}")]
    OracleInfeasible { n: usize, limit: usize },
    #[error("malformed decomposition file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OracleInfeasible { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::DimensionMismatch(msg.into()))
}
