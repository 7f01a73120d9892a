use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("unsupported quadrature degree {degree} on {domain}")]
    UnsupportedDegree { domain: &'static str, degree: usize },

    #[error("matrix is singular: pivot {pivot:e} at column {column}")]
    Singular { column: usize, pivot: f64 },

    #[error("matrix is not positive definite: {0}")]
    Indefinite(String),

    #[error("non-positive entry {value:e} in dual pairing diagonal at dof {dof}")]
    BrokenBiorthogonality { dof: usize, value: f64 },

    #[error("CG did not converge at level n={level}: relative residual {residual:e} after {iterations} iterations")]
    NotConverged {
        level: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("oracle mismatch at level n={level}: {field} discrepancy {discrepancy:e}")]
    OracleMismatch {
        level: usize,
        field: &'static str,
        discrepancy: f64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
