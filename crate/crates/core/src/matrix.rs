//! Dense sample container and packed symmetric matrices.

use rayon::join;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-per-observation dense matrix: N rows of p features, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> DataMatrix<T> {
    /// Builds a matrix from row-major values, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must have at least one row and one column, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {rows}x{cols}={} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / cols,
                col: pos % cols,
                message: "non-finite value".into(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(rows: usize, cols: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("no rows".into()));
        }
        let p = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: r.len(),
                    context: "ragged row",
                });
            }
            let _ = i;
        }
        let mut values = Vec::with_capacity(n * p);
        for r in rows {
            values.extend_from_slice(r);
        }
        Self::new(n, p, values)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.cols + j]
    }
}

/// Symmetric p x p matrix, lower triangle stored row-wise.
///
/// Entry (i, j) with j <= i lives at index i*(i+1)/2 + j; symmetry is exact by
/// construction since only a single triangle exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    dim: usize,
    tri: Vec<T>,
}

impl<T: Scalar> SymmetricMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            tri: vec![T::zero(); dim * (dim + 1) / 2],
        }
    }

    pub fn from_lower_triangle(dim: usize, tri: Vec<T>) -> Result<Self> {
        if tri.len() != dim * (dim + 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "lower triangle of a {dim}x{dim} matrix has {} entries, got {}",
                dim * (dim + 1) / 2,
                tri.len()
            )));
        }
        Ok(Self { dim, tri })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.tri[r * (r + 1) / 2 + c]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.tri[r * (r + 1) / 2 + c] = v;
    }

    /// y = S x.
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = T::zero());
        let mut idx = 0;
        for i in 0..self.dim {
            let xi = x[i];
            let mut acc = T::zero();
            for j in 0..i {
                let a = self.tri[idx];
                acc += a * x[j];
                y[j] += a * xi;
                idx += 1;
            }
            // diagonal
            acc += self.tri[idx] * xi;
            idx += 1;
            y[i] += acc;
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        let mut idx = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                let a = self.tri[idx];
                let sq = a * a;
                acc += if i == j { sq } else { sq + sq };
                idx += 1;
            }
        }
        acc.sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Expands to a dense row-major dim x dim buffer.
    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                out[i * self.dim + j] = v;
                out[j * self.dim + i] = v;
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.tri.iter_mut().zip(&other.tri) {
            *a += *b;
        }
    }

    fn accumulate_rows(&mut self, x: &DataMatrix<T>, lo: usize, hi: usize) {
        for r in lo..hi {
            let row = x.row(r);
            let mut idx = 0;
            for i in 0..self.dim {
                let xi = row[i];
                for j in 0..=i {
                    self.tri[idx] += xi * row[j];
                    idx += 1;
                }
            }
        }
    }
}

/// Rows below this count are summed sequentially within one tree leaf.
const SCATTER_LEAF: usize = 64;

/// Uncentered second-moment sum over rows: sum_i x_i x_i^T.
///
/// The reduction tree is fixed by the row count (midpoint splits down to
/// `SCATTER_LEAF`-row leaves accumulated in ascending row order), so the
/// result is bit-identical no matter how the branches are scheduled.
pub fn scatter_matrix<T: Scalar>(x: &DataMatrix<T>) -> SymmetricMatrix<T> {
    scatter_range(x, 0, x.n_rows())
}

fn scatter_range<T: Scalar>(x: &DataMatrix<T>, lo: usize, hi: usize) -> SymmetricMatrix<T> {
    if hi - lo <= SCATTER_LEAF {
        let mut acc = SymmetricMatrix::zeros(x.n_cols());
        acc.accumulate_rows(x, lo, hi);
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    let (mut left, right) = join(|| scatter_range(x, lo, mid), || scatter_range(x, mid, hi));
    left.add_assign(&right);
    left
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values_with_position() {
        let err = DataMatrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 4.0]).unwrap_err();
        match err {
            Error::Parse { row, col, .. } => {
                assert_eq!((row, col), (1, 0));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(DataMatrix::<f64>::new(0, 3, vec![]).is_err());
        assert!(DataMatrix::<f64>::new(3, 0, vec![]).is_err());
    }

    #[test]
    fn scatter_of_single_row_is_outer_product() {
        let x = DataMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        let s = scatter_matrix(&x);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(1, 0), 2.0);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(s.get(1, 1), 4.0);
    }

    #[test]
    fn scatter_of_canonical_rows_is_identity() {
        let x = DataMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let s = scatter_matrix(&x);
        assert_eq!(s.to_dense(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn symmetric_matvec_matches_dense() {
        let mut s = SymmetricMatrix::zeros(3);
        s.set(0, 0, 2.0);
        s.set(1, 0, -1.0);
        s.set(1, 1, 3.0);
        s.set(2, 0, 0.5);
        s.set(2, 1, 4.0);
        s.set(2, 2, -2.0);
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        s.mul_vec(&x, &mut y);
        let dense = s.to_dense();
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| dense[i * 3 + j] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-14);
        }
    }
}
