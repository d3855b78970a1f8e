use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at sample {0}")]
    NonFinite(usize),

    #[error("field is not admissible: {0}")]
    NotAdmissible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown double-well potential `{0}` (expected quartic, quadratic or logarithmic)")]
    UnknownWell(String),

    #[error("grid under-resolves the profile: need at least {required} samples, have {actual}")]
    Underresolved { required: usize, actual: usize },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("potential fails its structural checks: {0}")]
    BrokenPotential(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
