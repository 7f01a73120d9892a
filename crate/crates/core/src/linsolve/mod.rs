//! Sparse matrices and the linear solvers used by the pipeline.

mod cg;
mod csr;
mod dense;
mod market;

pub use cg::{cg_solve, CgOptions, SolveReport};
pub use csr::CsrMatrix;
pub use dense::{dense_lu_solve, DenseMatrix};
pub use market::{write_matrix_market, write_vector_market, MarketSymmetry};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
