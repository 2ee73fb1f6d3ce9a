use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: need n >= 2")]
    Dimension(usize),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("lattice basis is singular")]
    SingularBasis,

    #[error("vectors are not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("field has nonzero mean (|A_0| = {0:e}); subtract it first")]
    NonzeroMean(f64),

    #[error("coefficient at mode {mode:?} of {field} is not in the required matrix class")]
    MatrixClass { field: &'static str, mode: Vec<i64> },

    #[error("operator is not Hermitian (asymmetry {0:e}); use the singular-value path")]
    NonHermitian(f64),

    #[error("dense dimension {dim} exceeds limit {limit}; lower the cutoff")]
    TooLarge { dim: usize, limit: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no admissible candidate: {0}")]
    NoCandidate(String),

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }
}
