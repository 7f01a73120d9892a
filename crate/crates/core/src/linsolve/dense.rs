use crate::error::{Error, Result};

/// Row-major dense matrix, used for desk-scale oracle solves.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Gaussian elimination with partial pivoting. A pivot smaller than `1e-14`
/// times the largest magnitude in its original row is reported as singular.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::ShapeMismatch {
            op: "dense_lu_solve",
            lhs: a.shape(),
            rhs: (b.len(), 1),
        });
    }
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    let mut scale: Vec<f64> = m
        .chunks_exact(n)
        .map(|row| row.iter().fold(0.0f64, |s, v| s.max(v.abs())))
        .collect();

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
            scale.swap(k, p);
        }
        if pmag == 0.0 || pmag < 1e-14 * scale[k] {
            return Err(Error::Singular {
                column: k,
                pivot: pmag,
            });
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            m[i * n + k] = 0.0;
            for j in k + 1..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k * n + k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binom(n: i64, k: i64) -> i64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    /// Exact integer inverse of the n x n Hilbert matrix (1-based formula).
    fn hilbert_inverse(n: i64) -> Vec<Vec<i64>> {
        (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| {
                        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                        sign * (i + j - 1)
                            * binom(n + i - 1, n - j)
                            * binom(n + j - 1, n - i)
                            * binom(i + j - 2, i - 1).pow(2)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(dense_lu_solve(&a, &[3.0, -2.0]).unwrap(), vec![3.0, -2.0]);
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let a = DenseMatrix::from_rows(&rows);
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.matvec(&x);
        let got = dense_lu_solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() <= 1e-11);
        }
        let res: Vec<f64> = a.matvec(&got).iter().zip(&b).map(|(l, r)| l - r).collect();
        assert!(crate::linsolve::norm2(&res) <= 1e-10 * crate::linsolve::norm2(&b));
    }

    #[test]
    fn hilbert_against_exact_inverse() {
        let n = 4;
        let rows: Vec<Vec<f64>> = (1..=n).map(|i| (1..=n).map(|j| 1.0 / (i + j - 1) as f64).collect()).collect();
        let a = DenseMatrix::from_rows(&rows);
        let inv = hilbert_inverse(n as i64);
        assert_eq!(inv[0], vec![16, -120, 240, -140]);
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let x = dense_lu_solve(&a, &e).unwrap();
            for row in 0..n {
                let exact = inv[row][col] as f64;
                assert!((x[row] - exact).abs() <= 1e-8 * exact.abs().max(1.0), "{} vs {exact}", x[row]);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(dense_lu_solve(&a, &[1.0, 1.0]), Err(Error::Singular { column: 1, .. })));
        assert!(dense_lu_solve(&DenseMatrix::zeros(2, 3), &[1.0, 1.0]).is_err());
    }
}
