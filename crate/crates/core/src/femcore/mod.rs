//! P1 shape functions, the biorthogonal dual basis and quadrature rules.

pub mod basis;
pub mod quadrature;

pub use basis::{dual_basis_values, p1_grad, p1_shape, DualBasis};
pub use quadrature::{edge_quadrature, triangle_quadrature, QuadratureRule};
