use thiserror::Error;

/// Errors produced by the learning-rule, simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate rule: no non-zero terms")]
    DegenerateRule,
    #[error("rule term uses the target but no target was supplied")]
    MissingTarget,
    #[error("higher-order moments required: {0}")]
    HigherOrderMoments(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed IDX data: {0}")]
    Idx(String),
    #[error("training set is not consistent: {0}")]
    NotConsistent(String),
    #[error("zero input vector at row {0}")]
    ZeroVector(usize),
    #[error("non-differentiable transfer function in layer {0}; use PALR/PWLR or a steep-sigmoid surrogate")]
    NonDifferentiable(usize),
    #[error("{what} exceeds cap {cap}")]
    AboveCap { what: String, cap: usize },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("zero presynaptic activity")]
    ZeroPresynaptic,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
