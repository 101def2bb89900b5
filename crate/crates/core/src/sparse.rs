//! Compressed-row complex sparse matrices.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default cap on assembled dimensions, overridable with `NAGAOKA_DIM_BUDGET`.
pub const DEFAULT_DIM_BUDGET: usize = 200_000;

pub fn dimension_budget() -> usize {
    std::env::var("NAGAOKA_DIM_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_DIM_BUDGET)
}

pub(crate) fn check_budget(dim: usize) -> Result<()> {
    let budget = dimension_budget();
    if dim > budget {
        return Err(Error::DimensionBudget { dim, budget });
    }
    Ok(())
}

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
}

impl SparseMatrix {
    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut per_row: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            *per_row[r].entry(c).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in per_row {
            for (c, v) in row {
                if v != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix { rows, cols, indptr, indices, values, hermitian: false }
    }

    pub fn from_real_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        Self::from_triplets(rows, cols, triplets.into_iter().map(|(r, c, v)| (r, c, C64::new(v, 0.0))))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, std::iter::empty())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_real_triplets(n, n, (0..n).map(|i| (i, i, 1.0)));
        m.hermitian = true;
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::from_real_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)));
        m.hermitian = true;
        m
    }

    pub fn from_dense(d: &DMatrix<C64>) -> Self {
        let mut trips = Vec::new();
        for r in 0..d.nrows() {
            for c in 0..d.ncols() {
                trips.push((r, c, d[(r, c)]));
            }
        }
        Self::from_triplets(d.nrows(), d.ncols(), trips)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when the matrix was verified Hermitian.
    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Verify Hermiticity (relative tolerance 1e-12) and set the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        if !self.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: deviation {:e}",
                self.hermitian_deviation()
            )));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= rel_tol * self.max_abs().max(1.0)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v.conj())));
        m.hermitian = self.hermitian;
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= s;
        }
        m.hermitian = self.hermitian && s.im == 0.0;
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let mut m = Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()));
        m.hermitian = self.hermitian && other.hermitian;
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_real(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut trips = Vec::new();
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for r in 0..self.rows {
            acc.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(C64::new(0.0, 0.0)) += a * b;
                }
            }
            trips.extend(acc.iter().map(|(&c, &v)| (r, c, v)));
        }
        Self::from_triplets(self.rows, other.cols, trips)
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn mul_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.rows);
        self.mul_vec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        for (r, out) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *out = s;
        }
    }

    /// Product with a real vector using only the real parts of the entries.
    pub fn mul_real_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        for (r, out) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k].re * x[self.indices[k]];
            }
            *out = s;
        }
    }

    /// Restriction to the given row and column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.cols];
        for (i, &c) in cols.iter().enumerate() {
            col_pos[c] = i;
        }
        let mut trips = Vec::new();
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if col_pos[c] != usize::MAX {
                    trips.push((i, col_pos[c], v));
                }
            }
        }
        let mut m = Self::from_triplets(rows.len(), cols.len(), trips);
        m.hermitian = self.hermitian && rows == cols;
        m
    }

    /// Off-diagonal part.
    pub fn off_diagonal(&self) -> Self {
        let mut m = Self::from_triplets(self.rows, self.cols, self.triplets().filter(|(r, c, _)| r != c));
        m.hermitian = self.hermitian;
        m
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v.re;
        }
        d
    }
}

/// Kronecker product `A (x) B`, `A`'s index major. Rejects results above the
/// dimension budget.
pub fn tensor(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    let rows =
        a.rows.checked_mul(b.rows).ok_or(Error::DimensionBudget { dim: usize::MAX, budget: dimension_budget() })?;
    let cols =
        a.cols.checked_mul(b.cols).ok_or(Error::DimensionBudget { dim: usize::MAX, budget: dimension_budget() })?;
    check_budget(rows.max(cols))?;
    let mut trips = Vec::with_capacity(a.nnz() * b.nnz());
    for (ra, ca, va) in a.triplets() {
        for (rb, cb, vb) in b.triplets() {
            trips.push((ra * b.rows + rb, ca * b.cols + cb, va * vb));
        }
    }
    let mut m = SparseMatrix::from_triplets(rows, cols, trips);
    m.hermitian = a.hermitian && b.hermitian;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_sparse(rows: usize, cols: usize, seed: &[f64]) -> SparseMatrix {
        let mut trips = Vec::new();
        let mut k = 0;
        for r in 0..rows {
            for cc in 0..cols {
                let v = seed[k % seed.len()];
                k += 1;
                if v.abs() > 0.3 {
                    trips.push((r, cc, c(v, seed[(k * 7) % seed.len()])));
                }
            }
        }
        SparseMatrix::from_triplets(rows, cols, trips)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = SparseMatrix::from_real_triplets(2, 2, [(0, 0, 1.0), (0, 0, -1.0), (1, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(2.5, 0.0));
    }

    #[test]
    fn tensor_identity_and_dims() {
        let i2 = SparseMatrix::identity(2);
        let i3 = SparseMatrix::identity(3);
        assert_eq!(tensor(&i2, &i3).unwrap(), SparseMatrix::identity(6));
        let a = random_sparse(2, 3, &[0.5, -1.0, 0.1, 0.9]);
        let b = random_sparse(4, 2, &[0.7, 0.2, -0.8]);
        let k = tensor(&a, &b).unwrap();
        assert_eq!((k.rows(), k.cols()), (8, 6));
    }

    #[test]
    fn tensor_budget() {
        let big = SparseMatrix::identity(1000);
        assert!(matches!(tensor(&big, &big), Err(Error::DimensionBudget { .. })));
    }

    #[test]
    fn hermitian_flagging() {
        let h = SparseMatrix::from_triplets(2, 2, [(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, -2.0))]);
        assert!(h.clone().into_hermitian().is_ok());
        let n = SparseMatrix::from_triplets(2, 2, [(0, 1, c(1.0, 2.0)), (1, 0, c(1.0, 2.0))]);
        assert!(n.into_hermitian().is_err());
    }

    proptest! {
        #[test]
        fn kronecker_mixed_product(
            a in prop::collection::vec(-1.0f64..1.0, 9),
            b in prop::collection::vec(-1.0f64..1.0, 4),
            cc in prop::collection::vec(-1.0f64..1.0, 9),
            d in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let (a, cc) = (random_sparse(3, 3, &a), random_sparse(3, 3, &cc));
            let (b, d) = (random_sparse(2, 2, &b), random_sparse(2, 2, &d));
            let lhs = tensor(&a, &b).unwrap().matmul(&tensor(&cc, &d).unwrap());
            let rhs = tensor(&a.matmul(&cc), &b.matmul(&d)).unwrap();
            prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        }

        #[test]
        fn matvec_matches_dense(v in prop::collection::vec(-1.0f64..1.0, 16), x in prop::collection::vec(-1.0f64..1.0, 4)) {
            let m = random_sparse(4, 4, &v);
            let x = DVector::from_iterator(4, x.iter().map(|&r| c(r, 0.5 * r)));
            let diff = m.mul_vec(&x) - m.to_dense() * &x;
            prop_assert!(diff.norm() < 1e-12);
        }
    }
}
