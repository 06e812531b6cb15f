use std::path::PathBuf;

/// Errors raised by model validation, discretization and the estimators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("the model has no hard constraints (all interaction distances are zero); use the unconstrained closed form Z = exp(sum_i lambda_i vol(V))")]
    Unconstrained,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("graph has {vertices} vertices but {operation} is capped at {cap}")]
    TooManyVertices {
        operation: &'static str,
        vertices: usize,
        cap: usize,
    },

    #[error("refusing to build graph: {pairs} point pairs would be scanned (cap {cap}); required resolution {resolution:.6}, estimated adjacency memory {estimated_bytes} bytes")]
    GraphTooLarge {
        pairs: u64,
        cap: u64,
        resolution: f64,
        estimated_bytes: u64,
    },

    #[error("multiset partition function diverges: vertex {vertex} has weight {weight} ≥ 1")]
    WeightTooLarge { vertex: usize, weight: f64 },

    #[error("positions must be sorted (decrease at index {index})")]
    Unsorted { index: usize },

    #[error("partition cell {cell} contains no points")]
    EmptyCell { cell: usize },

    #[error("estimated probability that vertex {vertex} is unoccupied is zero at telescoping step {step} with {samples} samples; increase the sample count")]
    ZeroRatio {
        step: usize,
        vertex: usize,
        samples: usize,
    },

    #[error("Monte Carlo oracle needs truncation order {required} > {cap}; the model is too large for this oracle")]
    OracleTooLarge { required: usize, cap: usize },

    #[error("allocation lacks explicit cell geometry")]
    NoCellGeometry,

    #[error("malformed graph file {path}: {reason}")]
    GraphFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
