use crate::mesh::ElementGeometry;

/// P1 shape function values at a barycentric point: the coordinates themselves.
#[inline]
pub fn p1_shape(bary: [f64; 3]) -> [f64; 3] {
    debug_assert!(
        bary.iter().all(|&l| l >= -1e-14) && (bary.iter().sum::<f64>() - 1.0).abs() < 1e-12,
        "not a barycentric point: {bary:?}"
    );
    bary
}

#[inline]
pub fn p1_grad(geom: &ElementGeometry) -> [[f64; 2]; 3] {
    geom.grad_lambda
}

/// Element-local dual basis `mu_i = 3 l_i - l_j - l_k` at a barycentric point.
#[inline]
pub fn dual_basis_values(bary: [f64; 3]) -> [f64; 3] {
    DualBasis::default().values(bary)
}

/// Dual basis biorthogonal to the P1 basis on each triangle:
/// `int_T l_i mu_j = scale * |T| / 3 * delta_ij`, with `mu_1 + mu_2 + mu_3 = scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBasis {
    pub scale: f64,
}

impl Default for DualBasis {
    fn default() -> Self {
        DualBasis { scale: 1.0 }
    }
}

impl DualBasis {
    pub const COEFFICIENTS: [[f64; 3]; 3] = [[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]];

    pub fn scaled(scale: f64) -> Self {
        DualBasis { scale }
    }

    #[inline]
    pub fn values(&self, bary: [f64; 3]) -> [f64; 3] {
        let mut mu = [0.0; 3];
        for (m, row) in mu.iter_mut().zip(Self::COEFFICIENTS) {
            *m = self.scale * (row[0] * bary[0] + row[1] * bary[1] + row[2] * bary[2]);
        }
        mu
    }

    /// The biorthogonality constant `c_j` on a triangle of the given area.
    pub fn pairing_constant(&self, area: f64) -> f64 {
        self.scale * area / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::quadrature::triangle_quadrature;
    use approx::assert_abs_diff_eq;

    /// Exact `int_T l_i l_j` over a triangle of area `area`.
    fn exact_mass(i: usize, j: usize, area: f64) -> f64 {
        if i == j {
            area / 6.0
        } else {
            area / 12.0
        }
    }

    #[test]
    fn shape_values() {
        assert_eq!(p1_shape([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        assert_eq!(p1_shape([1.0 / 3.0; 3]), [1.0 / 3.0; 3]);
    }

    #[test]
    fn dual_values() {
        let c = dual_basis_values([1.0 / 3.0; 3]);
        for v in c {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        for p in [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.05, 0.9, 0.05]] {
            assert_abs_diff_eq!(dual_basis_values(p).iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p1_shape(p).iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn biorthogonality_from_exact_moments() {
        // int l_i mu_j = sum_k C[j][k] int l_i l_k, using closed-form moments.
        let area = 0.5;
        for i in 0..3 {
            for j in 0..3 {
                let m: f64 = (0..3).map(|k| DualBasis::COEFFICIENTS[j][k] * exact_mass(i, k, area)).sum();
                let expect = if i == j { area / 3.0 } else { 0.0 };
                assert_abs_diff_eq!(m, expect, epsilon = 1e-16);
            }
        }
        assert_abs_diff_eq!(
            (0..3).map(|k| DualBasis::COEFFICIENTS[0][k] * exact_mass(0, k, area)).sum::<f64>(),
            1.0 / 6.0,
            epsilon = 1e-16
        );
    }

    #[test]
    fn biorthogonality_by_quadrature() {
        let rule = triangle_quadrature(2).unwrap();
        for scale in [1.0, 7.0] {
            let dual = DualBasis::scaled(scale);
            for i in 0..3 {
                for j in 0..3 {
                    let m: f64 = rule.iter().map(|(p, w)| w * p1_shape(p)[i] * dual.values(p)[j]).sum();
                    let expect = if i == j { dual.pairing_constant(0.5) } else { 0.0 };
                    assert_abs_diff_eq!(m, expect, epsilon = 1e-15);
                }
            }
        }
    }
}
