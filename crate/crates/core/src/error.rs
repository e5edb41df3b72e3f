use thiserror::Error;

/// Errors raised by the design kernel, the bounds and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("information matrix is singular (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    SingularDesign { pivot: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pruning would leave {survivors} point(s) in dimension {dim} or a singular design")]
    OverPruned { survivors: usize, dim: usize },

    #[error("surviving weights are all non-positive")]
    DegenerateWeights,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = DesignError> = std::result::Result<T, E>;

impl From<std::io::Error> for DesignError {
    fn from(e: std::io::Error) -> Self {
        DesignError::Io(e.to_string())
    }
}
