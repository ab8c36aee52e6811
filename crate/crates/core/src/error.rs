use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("family is not sub-tight: smallest eigenvalue of I - B is {min_eigenvalue:.3e}")]
    NotSubTight { min_eigenvalue: f64 },

    #[error("frame is not tight: ||B - I|| = {deviation:.3e}; use the pipeline for sub-tight families")]
    NotTight { deviation: f64 },

    #[error("epsilon budget {budget} is below the family's epsilon {epsilon}")]
    BudgetTooSmall { budget: f64, epsilon: f64 },

    #[error("instance too large for exhaustive search: {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("matrix is not a projection: ||P^2 - P|| = {defect:.3e}")]
    NotProjection { defect: f64 },

    #[error("trace {trace} is not within 1e-6 of an integer")]
    NonIntegralTrace { trace: f64 },

    #[error("block {block} has epsilon {epsilon} above its budget {budget}")]
    BlockBudget { block: usize, epsilon: f64, budget: f64 },

    #[error("diagonal entry {index} is {value}, above the bound {bound}")]
    DiagonalBound { index: usize, value: f64, bound: f64 },

    #[error("certified bound violated: error {error} > bound {bound}")]
    BoundViolation { error: f64, bound: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by an input that fails a structural check
    /// (as opposed to I/O problems or bound violations).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::BoundViolation { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
