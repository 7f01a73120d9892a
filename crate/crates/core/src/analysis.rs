//! Error norms against manufactured solutions and observed convergence rates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::femcore::quadrature::{EdgeRule, TriangleRule};
use crate::femcore::{edge_quadrature, triangle_quadrature};
use crate::mesh::{ElementGeometry, Mesh};
use crate::problems::{ScalarField, VectorField};

/// Quadrature used for error integrals. Defaults: degree 6 on triangles,
/// degree 5 on edges.
#[derive(Debug, Clone)]
pub struct ErrorEvaluator {
    element: TriangleRule,
    edge: EdgeRule,
    execution: Execution,
}

impl Default for ErrorEvaluator {
    fn default() -> Self {
        Self::new(6, 5, Execution::default()).expect("default degrees are supported")
    }
}

impl ErrorEvaluator {
    pub fn new(element_degree: usize, edge_degree: usize, execution: Execution) -> Result<Self> {
        Ok(ErrorEvaluator {
            element: triangle_quadrature(element_degree)?,
            edge: edge_quadrature(edge_degree)?,
            execution,
        })
    }

    fn sum_elements<F>(&self, mesh: &Mesh, f: F) -> f64
    where
        F: Fn(usize, &[[f64; 2]; 3], &ElementGeometry) -> f64 + Sync + Send,
    {
        self.execution
            .map(mesh.num_triangles(), |t| {
                let corners = mesh.corners(t);
                f(t, &corners, &ElementGeometry::from_corners(corners))
            })
            .into_iter()
            .sum()
    }

    /// `Σ_T ∫_T (u − u_h)²` and `Σ_T ∫_T |∇(u − u_h)|²`.
    fn element_errors(&self, mesh: &Mesh, uh: &[f64], u: &ScalarField, grad: Option<&VectorField>) -> (f64, f64) {
        let parts = self.execution.map(mesh.num_triangles(), |t| {
            let tri = mesh.triangles()[t];
            let corners = mesh.corners(t);
            let geom = ElementGeometry::from_corners(corners);
            let jac = 2.0 * geom.area;
            let mut guh = [0.0; 2];
            for i in 0..3 {
                guh[0] += geom.grad_lambda[i][0] * uh[tri[i]];
                guh[1] += geom.grad_lambda[i][1] * uh[tri[i]];
            }
            let (mut l2, mut h1) = (0.0, 0.0);
            for (p, w) in self.element.iter() {
                let x = ElementGeometry::map(&corners, p);
                let val: f64 = (0..3).map(|i| p[i] * uh[tri[i]]).sum();
                l2 += w * jac * (u(x) - val).powi(2);
                if let Some(g) = grad {
                    let gu = g(x);
                    h1 += w * jac * ((gu[0] - guh[0]).powi(2) + (gu[1] - guh[1]).powi(2));
                }
            }
            (l2, h1)
        });
        parts.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y))
    }

    /// `‖u − u_h‖_{0,Ω}` for nodal values `uh`.
    pub fn l2_u(&self, mesh: &Mesh, uh: &[f64], u: &ScalarField) -> f64 {
        self.element_errors(mesh, uh, u, None).0.sqrt()
    }

    /// `‖e‖_{1/2,h} = (Σ_e h_e⁻¹ ‖e‖²_{0,e})^{1/2}` for `e = u − u_h`.
    pub fn boundary_u(&self, mesh: &Mesh, uh: &[f64], u: &ScalarField) -> f64 {
        let verts = mesh.vertices();
        let mut sum = 0.0;
        for e in mesh.boundary_edges() {
            let [a, b] = e.vertices;
            let (p0, p1) = (verts[a], verts[b]);
            let mut edge = 0.0;
            for (s, w) in self.edge.iter() {
                let x = [(1.0 - s) * p0[0] + s * p1[0], (1.0 - s) * p0[1] + s * p1[1]];
                let val = (1.0 - s) * uh[a] + s * uh[b];
                edge += w * e.length * (u(x) - val).powi(2);
            }
            sum += edge / e.length;
        }
        sum.sqrt()
    }

    /// `‖e‖_{1,h} = ‖e‖_{1,Ω} + ‖e‖_{1/2,h}` (a sum of the two norms).
    pub fn h1h_u(&self, mesh: &Mesh, uh: &[f64], u: &ScalarField, grad: &VectorField) -> f64 {
        let (l2, h1) = self.element_errors(mesh, uh, u, Some(grad));
        (l2 + h1).sqrt() + self.boundary_u(mesh, uh, u)
    }

    /// `‖∇u − σ_h‖_{0,Ω}` for a stacked P1 vector field.
    pub fn l2_sigma(&self, mesh: &Mesh, sigma: &[f64], grad: &VectorField) -> f64 {
        let n = mesh.num_vertices();
        self.sum_elements(mesh, |t, corners, geom| {
            let tri = mesh.triangles()[t];
            let jac = 2.0 * geom.area;
            self.element
                .iter()
                .map(|(p, w)| {
                    let g = grad(ElementGeometry::map(corners, p));
                    let s0: f64 = (0..3).map(|i| p[i] * sigma[tri[i]]).sum();
                    let s1: f64 = (0..3).map(|i| p[i] * sigma[n + tri[i]]).sum();
                    w * jac * ((g[0] - s0).powi(2) + (g[1] - s1).powi(2))
                })
                .sum()
        })
        .sqrt()
    }
}

pub fn l2_error_u(mesh: &Mesh, uh: &[f64], u: &ScalarField) -> f64 {
    ErrorEvaluator::default().l2_u(mesh, uh, u)
}

pub fn h1h_error_u(mesh: &Mesh, uh: &[f64], u: &ScalarField, grad: &VectorField) -> f64 {
    ErrorEvaluator::default().h1h_u(mesh, uh, u, grad)
}

pub fn l2_error_sigma(mesh: &Mesh, sigma: &[f64], grad: &VectorField) -> f64 {
    ErrorEvaluator::default().l2_sigma(mesh, sigma, grad)
}

/// `log(e_coarse / e_fine) / log(refinement)`; `None` when either error is
/// not a positive finite number.
pub fn rate(coarse: f64, fine: f64, refinement: f64) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    (ok(coarse) && ok(fine)).then(|| (coarse / fine).ln() / refinement.ln())
}

/// `log₂(e_{k−1} / e_k)` for successive errors under mesh halving.
pub fn convergence_rates(errors: &[f64]) -> Vec<Option<f64>> {
    errors.windows(2).map(|w| rate(w[0], w[1], 2.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelErrors {
    pub level: usize,
    pub elements: usize,
    pub l2_u: f64,
    pub h1h_u: f64,
    pub l2_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    #[serde(flatten)]
    pub errors: LevelErrors,
    pub rate_l2_u: Option<f64>,
    pub rate_h1h_u: Option<f64>,
    pub rate_l2_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Rows must be ordered by increasing level; rates use the actual level
    /// ratio, which is `log₂` for halving.
    pub fn from_levels(levels: &[LevelErrors]) -> Self {
        let rows = levels
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let prev = k.checked_sub(1).map(|j| levels[j]);
                let r = |f: fn(&LevelErrors) -> f64| {
                    prev.and_then(|p| rate(f(&p), f(e), e.level as f64 / p.level as f64))
                };
                ErrorRow {
                    errors: *e,
                    rate_l2_u: r(|e| e.l2_u),
                    rate_h1h_u: r(|e| e.h1h_u),
                    rate_l2_sigma: r(|e| e.l2_sigma),
                }
            })
            .collect();
        ErrorTable { rows }
    }

    pub fn finest(&self) -> Option<&ErrorRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("elem,eL2,rateL2,e1h,rate1h,eSig,rateSig\n");
        let rate = |r: Option<f64>| r.map(|r| format!("{r:.4}")).unwrap_or_default();
        for row in &self.rows {
            let e = &row.errors;
            let _ = writeln!(
                s,
                "{},{:.6e},{},{:.6e},{},{:.6e},{}",
                e.elements,
                e.l2_u,
                rate(row.rate_l2_u),
                e.h1h_u,
                rate(row.rate_h1h_u),
                e.l2_sigma,
                rate(row.rate_l2_sigma)
            );
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| elem | ‖u−u_h‖_{0,Ω} | rate | ‖u−u_h‖_{1,h} | rate | ‖σ−σ_h‖_{0,Ω} | rate |\n");
        s.push_str("|-----:|------:|-----:|------:|-----:|------:|-----:|\n");
        let rate = |r: Option<f64>| r.map(|r| format!("{r:.4}")).unwrap_or_default();
        for row in &self.rows {
            let e = &row.errors;
            let _ = writeln!(
                s,
                "| {} | {:.2e} | {} | {:.2e} | {} | {:.2e} | {} |",
                e.elements,
                e.l2_u,
                rate(row.rate_l2_u),
                e.h1h_u,
                rate(row.rate_h1h_u),
                e.l2_sigma,
                rate(row.rate_l2_sigma)
            );
        }
        s
    }
}
