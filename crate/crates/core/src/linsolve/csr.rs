use crate::error::{Error, Result};
use crate::exec::Execution;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no exact
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            offsets: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(n, n, &triplets).expect("diagonal triplets are in range")
    }

    /// Validates raw CSR arrays.
    pub fn try_from_parts(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("malformed CSR: {m}")));
        if offsets.len() != rows + 1 || offsets[0] != 0 {
            return bad("offset array length");
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets decrease");
        }
        if *offsets.last().unwrap() != indices.len() || indices.len() != values.len() {
            return bad("last offset does not match stored values");
        }
        for r in 0..rows {
            let row = &indices[offsets[r]..offsets[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= cols) {
                return bad("column indices not strictly increasing or out of range");
            }
        }
        if values.contains(&0.0) {
            return bad("explicit zero");
        }
        Ok(CsrMatrix {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// in input order and dropping entries that sum to exactly zero.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; rows + 1];
        for &(r, c, _) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange {
                    index: if r >= rows { r } else { c },
                    len: if r >= rows { rows } else { cols },
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, keeping input order
        let mut fill = counts.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            bucket[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for r in 0..rows {
            let row = &mut bucket[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == c {
                    sum += row[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    indices.push(c);
                    values.push(sum);
                }
            }
            offsets.push(indices.len());
        }
        Ok(CsrMatrix {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[r]..self.offsets[r + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        idx.binary_search(&c).map_or(0.0, |k| val[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.spmv_with(Execution::Sequential, x)
    }

    pub fn spmv_with(&self, exec: Execution, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "spmv",
                lhs: self.shape(),
                rhs: (x.len(), 1),
            });
        }
        Ok(exec.map(self.rows, |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum()
        }))
    }

    /// `y = A x` into a preallocated buffer; shapes are the caller's responsibility.
    pub(crate) fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            *yr = idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                indices[fill[c]] = r;
                values[fill[c]] = v;
                fill[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            offsets: counts,
            indices,
            values,
        }
    }

    /// `A diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> Result<CsrMatrix> {
        if d.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "scale_columns",
                lhs: self.shape(),
                rhs: (d.len(), d.len()),
            });
        }
        let mut out = self.clone();
        for (v, &c) in out.values.iter_mut().zip(&self.indices) {
            *v *= d[c];
        }
        out.drop_zeros();
        Ok(out)
    }

    /// `diag(d) A`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<CsrMatrix> {
        if d.len() != self.rows {
            return Err(Error::ShapeMismatch {
                op: "scale_rows",
                lhs: (d.len(), d.len()),
                rhs: self.shape(),
            });
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            for v in &mut out.values[self.offsets[r]..self.offsets[r + 1]] {
                *v *= d[r];
            }
        }
        out.drop_zeros();
        Ok(out)
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        self.matmul_with(Execution::Sequential, other)
    }

    /// Sparse product in two passes: the symbolic pass fixes each row's sorted
    /// pattern, the numeric pass accumulates into it in a fixed order.
    pub fn matmul_with(&self, exec: Execution, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let patterns: Vec<Vec<usize>> = exec.map(self.rows, |r| {
            let mut cols: Vec<usize> = self
                .row(r)
                .0
                .iter()
                .flat_map(|&k| other.row(k).0.iter().copied())
                .collect();
            cols.sort_unstable();
            cols.dedup();
            cols
        });
        let rows_vals: Vec<Vec<f64>> = exec.map(self.rows, |r| {
            let pattern = &patterns[r];
            let mut acc = vec![0.0; pattern.len()];
            let (idx, val) = self.row(r);
            for (&k, &a) in idx.iter().zip(val) {
                let (oidx, oval) = other.row(k);
                for (&c, &b) in oidx.iter().zip(oval) {
                    let slot = pattern.binary_search(&c).expect("column in symbolic pattern");
                    acc[slot] += a * b;
                }
            }
            acc
        });
        let mut offsets = Vec::with_capacity(self.rows + 1);
        offsets.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (pattern, vals) in patterns.into_iter().zip(rows_vals) {
            for (c, v) in pattern.into_iter().zip(vals) {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: other.cols,
            offsets,
            indices,
            values,
        })
    }

    /// `A diag(dinv) B^T`.
    pub fn triple_product(a: &CsrMatrix, dinv: &[f64], b: &CsrMatrix) -> Result<CsrMatrix> {
        Self::triple_product_with(Execution::Sequential, a, dinv, b)
    }

    pub fn triple_product_with(exec: Execution, a: &CsrMatrix, dinv: &[f64], b: &CsrMatrix) -> Result<CsrMatrix> {
        if a.cols != b.cols {
            return Err(Error::ShapeMismatch {
                op: "triple_product",
                lhs: a.shape(),
                rhs: b.shape(),
            });
        }
        a.scale_columns(dinv)?.matmul_with(exec, &b.transpose())
    }

    /// `sum_k c_k A_k` over matrices of a common shape.
    pub fn add_scaled(terms: &[(f64, &CsrMatrix)]) -> Result<CsrMatrix> {
        let Some(&(_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("add_scaled needs at least one term".into()));
        };
        let shape = first.shape();
        if let Some(&(_, m)) = terms.iter().find(|(_, m)| m.shape() != shape) {
            return Err(Error::ShapeMismatch {
                op: "add_scaled",
                lhs: shape,
                rhs: m.shape(),
            });
        }
        let mut triplets = Vec::with_capacity(terms.iter().map(|(_, m)| m.nnz()).sum());
        for r in 0..shape.0 {
            for &(s, m) in terms {
                let (idx, val) = m.row(r);
                triplets.extend(idx.iter().zip(val).map(|(&c, &v)| (r, c, s * v)));
            }
        }
        Self::from_triplets(shape.0, shape.1, &triplets)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||A - A^T||_F / ||A||_F` (zero for the zero matrix).
    pub fn symmetry_defect(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 || self.rows != self.cols {
            return if self.rows == self.cols { 0.0 } else { f64::INFINITY };
        }
        let t = self.transpose();
        let diff = Self::add_scaled(&[(1.0, self), (-1.0, &t)]).expect("square");
        diff.frobenius_norm() / norm
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    fn drop_zeros(&mut self) {
        if !self.values.contains(&0.0) {
            return;
        }
        let mut offsets = Vec::with_capacity(self.rows + 1);
        offsets.push(0);
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        self.offsets = offsets;
        self.indices = indices;
        self.values = values;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen_bool(density) {
                    t.push((r, c, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(rows, cols, &t).unwrap()
    }

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let (n, m, p) = (a.len(), b.len(), b[0].len());
        let mut c = vec![vec![0.0; p]; n];
        for i in 0..n {
            for k in 0..m {
                for j in 0..p {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn assert_dense_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= tol, "{x} vs {y}");
            }
        }
    }

    fn check_invariants(m: &CsrMatrix) {
        CsrMatrix::try_from_parts(m.rows, m.cols, m.offsets.clone(), m.indices.clone(), m.values.clone()).unwrap();
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, -1.0), (1, 1, 3.0), (1, 1, 1.0)]).unwrap();
        check_invariants(&m);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 1), 4.0);
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn malformed_parts_rejected() {
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 3], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn identity_spmv() {
        let i = CsrMatrix::identity(5);
        let x = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(i.spmv(&x).unwrap(), x);
        assert!(i.spmv(&[1.0]).is_err());
    }

    #[test]
    fn triple_product_identity() {
        let i = CsrMatrix::identity(4);
        let p = CsrMatrix::triple_product(&i, &[1.0; 4], &i).unwrap();
        assert_eq!(p, i);
    }

    #[test]
    fn products_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_sparse(&mut rng, 6, 6, 0.4);
            let b = random_sparse(&mut rng, 6, 6, 0.4);
            let d: Vec<f64> = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
            let (ad, bd) = (a.to_dense(), b.to_dense());

            let ab = a.matmul(&b).unwrap();
            check_invariants(&ab);
            assert_dense_close(&ab.to_dense(), &dense_mul(&ad, &bd), 1e-13);

            let dd: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect();
            let bt = b.transpose();
            check_invariants(&bt);
            let expect = dense_mul(&dense_mul(&ad, &dd), &bt.to_dense());
            let tp = CsrMatrix::triple_product(&a, &d, &b).unwrap();
            check_invariants(&tp);
            assert_dense_close(&tp.to_dense(), &expect, 1e-13);

            let sum = CsrMatrix::add_scaled(&[(2.0, &a), (-0.5, &b)]).unwrap();
            let expect: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| 2.0 * ad[i][j] - 0.5 * bd[i][j]).collect()).collect();
            assert_dense_close(&sum.to_dense(), &expect, 1e-15);

            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = a.spmv(&x).unwrap();
            for i in 0..6 {
                let e: f64 = (0..6).map(|j| ad[i][j] * x[j]).sum();
                assert!((y[i] - e).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn parallel_products_are_bitwise_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_sparse(&mut rng, 40, 30, 0.2);
        let b = random_sparse(&mut rng, 30, 50, 0.2);
        assert_eq!(a.matmul_with(Execution::Sequential, &b).unwrap(), a.matmul_with(Execution::Parallel, &b).unwrap());
        let x: Vec<f64> = (0..30).map(|_| rng.gen()).collect();
        assert_eq!(a.spmv_with(Execution::Sequential, &x).unwrap(), a.spmv_with(Execution::Parallel, &x).unwrap());
    }

    #[test]
    fn shape_errors() {
        let a = CsrMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(CsrMatrix::add_scaled(&[(1.0, &a), (1.0, &CsrMatrix::zeros(3, 2))]).is_err());
        assert!(CsrMatrix::triple_product(&a, &[1.0; 3], &CsrMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let s = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(s.symmetry_defect(), 0.0);
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 1.0)]).unwrap();
        assert!(a.symmetry_defect() > 0.5);
    }

    proptest! {
        #[test]
        fn transpose_is_adjoint(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_sparse(&mut rng, rows, cols, 0.3);
            let x: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = super::super::dot(&a.spmv(&x).unwrap(), &y);
            let rhs = super::super::dot(&x, &a.transpose().spmv(&y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-13);
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
