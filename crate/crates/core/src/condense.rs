//! Static condensation of the block system onto the primal unknowns.
//!
//! The third block row gives `x_σ = D⁻¹Bᵀx_u`, the second
//! `x_φ = D⁻¹(Aᵀx_u − rMx_σ − f2)`, and substituting both into the first
//! leaves `K x_u = F` with
//!
//! ```text
//! K = (1−r)S + αC − AD⁻¹Bᵀ − BD⁻¹Aᵀ + rBD⁻¹MD⁻¹Bᵀ
//! F = f1 − BD⁻¹f2
//! ```

use crate::assembly::BlockSystem;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linsolve::{cg_solve, dense_lu_solve, CgOptions, CsrMatrix, DenseMatrix, SolveReport};

#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub r: f64,
    pub alpha: f64,
}

/// How the condensed load treats `f2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReducedLoad {
    /// `F = f1 − BD⁻¹f2`, the elimination of the block system.
    #[default]
    Eliminated,
    /// `F = f1 − BDf2`. Inconsistent with the block system; kept only so the
    /// oracle check can demonstrate the difference.
    UninvertedPairing,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub phi: Vec<f64>,
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("stabilisation weight r must lie in (0, 1), got {r}")))
    }
}

fn inverse_pairing(blocks: &BlockSystem) -> Result<Vec<f64>> {
    blocks
        .pairing
        .iter()
        .enumerate()
        .map(|(dof, &d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::BrokenBiorthogonality { dof, value: d })
            }
        })
        .collect()
}

pub fn condense(blocks: &BlockSystem, r: f64) -> Result<CondensedSystem> {
    condense_with(blocks, r, ReducedLoad::Eliminated, Execution::default())
}

pub fn condense_with(blocks: &BlockSystem, r: f64, load: ReducedLoad, exec: Execution) -> Result<CondensedSystem> {
    check_r(r)?;
    let dinv = inverse_pairing(blocks)?;
    let a = &blocks.boundary;
    let b = &blocks.gradient;

    let cross = CsrMatrix::triple_product_with(exec, a, &dinv, b)?;
    let cross_t = cross.transpose();
    let bdm = b.scale_columns(&dinv)?.matmul_with(exec, &blocks.mass)?;
    let stab = CsrMatrix::triple_product_with(exec, &bdm, &dinv, b)?;
    let matrix = CsrMatrix::add_scaled(&[
        (1.0 - r, &blocks.stiffness),
        (blocks.alpha, &blocks.penalty),
        (-1.0, &cross),
        (-1.0, &cross_t),
        (r, &stab),
    ])?;

    let scaled_f2: Vec<f64> = match load {
        ReducedLoad::Eliminated => blocks.f2.iter().zip(&dinv).map(|(f, d)| f * d).collect(),
        ReducedLoad::UninvertedPairing => blocks.f2.iter().zip(&blocks.pairing).map(|(f, d)| f * d).collect(),
    };
    let correction = b.spmv(&scaled_f2)?;
    let rhs = blocks.f1.iter().zip(&correction).map(|(f, c)| f - c).collect();

    Ok(CondensedSystem {
        matrix,
        rhs,
        r,
        alpha: blocks.alpha,
    })
}

/// `x_σ = D⁻¹Bᵀx_u`.
pub fn recover_sigma(blocks: &BlockSystem, u: &[f64]) -> Result<Vec<f64>> {
    let dinv = inverse_pairing(blocks)?;
    let bt_u = blocks.gradient.transpose().spmv(u)?;
    Ok(bt_u.iter().zip(&dinv).map(|(v, d)| v * d).collect())
}

/// `x_φ = D⁻¹(Aᵀx_u − rMx_σ − f2)`.
pub fn recover_phi(blocks: &BlockSystem, u: &[f64], sigma: &[f64], r: f64) -> Result<Vec<f64>> {
    let dinv = inverse_pairing(blocks)?;
    let at_u = blocks.boundary.transpose().spmv(u)?;
    let m_s = blocks.mass.spmv(sigma)?;
    Ok((0..dinv.len())
        .map(|i| dinv[i] * (at_u[i] - r * m_s[i] - blocks.f2[i]))
        .collect())
}

/// Solves the condensed system by CG and recovers the flux and multiplier.
pub fn solve_condensed(blocks: &BlockSystem, r: f64, cg: &CgOptions) -> Result<(Solution, SolveReport)> {
    let sys = condense(blocks, r)?;
    let (u, report) = cg_solve(&sys.matrix, &sys.rhs, cg)?;
    let sigma = recover_sigma(blocks, &u)?;
    let phi = recover_phi(blocks, &u, &sigma, r)?;
    Ok((Solution { u, sigma, phi }, report))
}

/// The full 5N x 5N block matrix, densely.
pub fn full_saddle_matrix(blocks: &BlockSystem, r: f64) -> DenseMatrix {
    let n = blocks.n;
    let (su, ss, sp) = (0, n, 3 * n);
    let mut m = DenseMatrix::zeros(5 * n, 5 * n);
    for (i, j, v) in blocks.stiffness.triplets() {
        m.add(su + i, su + j, (1.0 - r) * v);
    }
    for (i, j, v) in blocks.penalty.triplets() {
        m.add(su + i, su + j, blocks.alpha * v);
    }
    for (i, j, v) in blocks.boundary.triplets() {
        m.add(su + i, ss + j, -v);
        m.add(ss + j, su + i, -v);
    }
    for (i, j, v) in blocks.gradient.triplets() {
        m.add(su + i, sp + j, -v);
        m.add(sp + j, su + i, -v);
    }
    for (i, j, v) in blocks.mass.triplets() {
        m.add(ss + i, ss + j, r * v);
    }
    for (k, &d) in blocks.pairing.iter().enumerate() {
        m.add(ss + k, sp + k, d);
        m.add(sp + k, ss + k, d);
    }
    m
}

/// Dense direct solve of the full indefinite block system. Desk-scale only.
pub fn solve_full_saddle(blocks: &BlockSystem, r: f64) -> Result<Solution> {
    check_r(r)?;
    let n = blocks.n;
    let m = full_saddle_matrix(blocks, r);
    let mut rhs = vec![0.0; 5 * n];
    rhs[..n].copy_from_slice(&blocks.f1);
    for (dst, f) in rhs[n..3 * n].iter_mut().zip(&blocks.f2) {
        *dst = -f;
    }
    let x = dense_lu_solve(&m, &rhs)?;
    Ok(Solution {
        u: x[..n].to_vec(),
        sigma: x[n..3 * n].to_vec(),
        phi: x[3 * n..].to_vec(),
    })
}
