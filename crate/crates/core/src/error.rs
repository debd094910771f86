use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has no states")]
    Empty,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("row {row} sums to {sum}, outside tolerance")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("chain is reducible: not every state communicates with every other")]
    Reducible,

    #[error("mean sojourn time of state {state} is not positive ({value})")]
    NonpositiveSojourn { state: usize, value: f64 },

    #[error("invalid holding moments: {0}")]
    InvalidMoments(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear system is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("u^T e is too close to zero ({0:e})")]
    DegenerateU(f64),

    #[error("QR iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("generalized inverse was built for a different chain")]
    RouteMismatch,

    #[error("generator diagonal q_{state}{state} = {value} is not strictly negative")]
    ZeroDiagonal { state: usize, value: f64 },

    #[error("invalid rate {name} = {value}")]
    InvalidRate { name: String, value: f64 },

    #[error("state index {state} out of range for {m} states")]
    StateOutOfRange { state: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
