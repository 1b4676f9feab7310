//! Sparse storage, direct solves and inner-product utilities.

mod inner;
mod lu;
mod sparse;

pub use inner::{ip_norm, InnerProduct};
pub use lu::{factorize, solve, Factorization, SymbolicFactorization, PIVOT_THRESHOLD};
pub use sparse::{dot, norm2, SparseMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {index} below threshold)")]
    SingularMatrix { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("matrix pattern differs from the symbolic factorization")]
    PatternMismatch,
    #[error("sparse backend failure: {0}")]
    Backend(String),
}
