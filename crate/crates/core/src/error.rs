use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("illegal move at step {step}: {reason}")]
    IllegalMove { step: usize, reason: String },

    #[error("target not reached")]
    TargetNotReached,

    #[error("unsupported graph: {0}")]
    UnsupportedGraph(String),

    #[error("search guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("malformed program: {0}")]
    MalformedProgram(String),

    #[error("encoding mismatch: {0}")]
    EncodingMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("side condition violated: {0}")]
    SideCondition(String),

    #[error("rectangle leaves f^-1(1) at point {point:?}")]
    ContainmentFailure { point: Vec<u64> },

    #[error("assertion failed: {0}")]
    AssertionFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
