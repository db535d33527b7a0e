use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantity overflowed or became non-finite despite stabilisation.
    #[error("range error: {0}")]
    Range(String),

    /// The state carries no fluctuations in the relevant direction, so the
    /// Fisher information it would define is infinite.
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// A target value lies outside what the model can attain for finite
    /// positive inverse temperature.
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("all {0} trials failed to invert the sample mean energy")]
    AllTrialsFailed(u64),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
