use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interaction matrix: {0}")]
    InvalidInteraction(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("basis is rank deficient (rank {rank} < {expected} columns)")]
    Rank { rank: usize, expected: usize },

    #[error("matrix is not a projection: ||P^2 - P|| = {defect:e}")]
    NotIdempotent { defect: f64 },

    #[error("range and kernel overlap; oblique projection is singular")]
    Singular,

    #[error("subspaces intersect nontrivially")]
    Intersection,

    #[error("spectral radius iteration did not converge after {iterations} steps (bracket [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
        iterate: Vec<f64>,
    },

    #[error("no Perron certificate exists: spectral radius {radius} is not below 1")]
    NoCertificate { radius: f64 },

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("Gram operator singular (smallest singular value {sigma_min:e})")]
    GramSingular { sigma_min: f64 },

    #[error(
        "projection iteration diverged or stalled after {steps} steps (last gap {last_gap:e})"
    )]
    Divergence {
        steps: usize,
        last_gap: f64,
        gaps: Vec<f64>,
    },

    #[error("criterion fails: spectral radius {radius} is not below 1")]
    CriterionFails { radius: f64 },

    #[error(
        "block {block} (subspaces {indices:?}) fails the criterion with spectral radius {radius}"
    )]
    BlockFailure {
        block: usize,
        indices: Vec<usize>,
        radius: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tensor dimension {dim} exceeds size cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
