use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgOptions {
    /// Relative residual target `||b - Ax|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-12,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual at termination.
    pub relative_residual: f64,
    pub converged: bool,
    // Wall time would make otherwise identical reports differ between runs.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Jacobi-preconditioned conjugate gradients.
///
/// Fails with [`Error::Indefinite`] when a non-positive diagonal entry or a
/// direction of non-positive curvature is met. Running out of iterations is
/// not an error; it shows up as `converged == false` in the report.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::ShapeMismatch {
            op: "cg_solve",
            lhs: a.shape(),
            rhs: (b.len(), 1),
        });
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::InvalidArgument(format!("CG tolerance {} not in (0, 1)", opts.tol)));
    }
    let diag = a.diagonal();
    if let Some((i, d)) = diag.iter().enumerate().find(|(_, &d)| d <= 0.0) {
        return Err(Error::Indefinite(format!("diagonal entry {d:e} at row {i}")));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rel = 1.0;

    while iterations < opts.max_iter {
        a.spmv_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 {
            return Err(Error::Indefinite(format!(
                "curvature {curvature:e} at iteration {iterations}"
            )));
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        iterations += 1;

        rel = norm2(&r) / b_norm;
        if rel <= opts.tol {
            // confirm against the true residual
            a.spmv_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rel = norm2(&r) / b_norm;
            if rel <= opts.tol {
                break;
            }
            // restart from the true residual
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
                p[i] = z[i];
            }
            rz = dot(&r, &z);
            continue;
        }

        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    if rel > opts.tol {
        a.spmv_into(&x, &mut ap);
        let res: Vec<f64> = b.iter().zip(&ap).map(|(b, ax)| b - ax).collect();
        rel = norm2(&res) / b_norm;
    }
    Ok((
        x,
        SolveReport {
            iterations,
            relative_residual: rel,
            converged: rel <= opts.tol,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}
