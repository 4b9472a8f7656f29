//! Robust centering: feature-wise medians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::scalar::Scalar;

/// Feature-wise median of the training data, the center every downstream
/// score is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterVector<T>(pub Vec<T>);

impl<T: Scalar> CenterVector<T> {
    pub fn zeros(p: usize) -> Self {
        Self(vec![T::zero(); p])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// Coordinate-wise median of every column.
///
/// Even row counts take the lower of the two middle order statistics, so each
/// coordinate is an actual data value and re-centering then re-measuring the
/// median gives exactly zero.
pub fn featurewise_median<T: Scalar>(x: &DataMatrix<T>) -> CenterVector<T> {
    let n = x.n_rows();
    let p = x.n_cols();
    let rank = (n - 1) / 2;
    let mut out = Vec::with_capacity(p);
    let mut scratch: Vec<T> = Vec::with_capacity(n);
    for j in 0..p {
        scratch.clear();
        scratch.extend((0..n).map(|i| x.get(i, j)));
        let (_, med, _) = scratch.select_nth_unstable_by(rank, |a, b| {
            a.partial_cmp(b).expect("validated finite values")
        });
        out.push(*med);
    }
    CenterVector(out)
}

/// Subtracts the center from every row.
pub fn center<T: Scalar>(x: &DataMatrix<T>, mu: &CenterVector<T>) -> Result<DataMatrix<T>> {
    if mu.dim() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            got: mu.dim(),
            context: "center vector vs feature count",
        });
    }
    let mut values = Vec::with_capacity(x.n_rows() * x.n_cols());
    for row in x.rows_iter() {
        values.extend(row.iter().zip(&mu.0).map(|(&v, &m)| v - m));
    }
    Ok(DataMatrix::from_parts(x.n_rows(), x.n_cols(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DataMatrix<f64> {
        DataMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn odd_count_median_is_the_middle_row_value() {
        let x = matrix(&[&[1.0, 10.0], &[2.0, 20.0], &[3.0, 30.0]]);
        assert_eq!(featurewise_median(&x).0, vec![2.0, 20.0]);
    }

    #[test]
    fn even_count_takes_the_lower_middle_and_ignores_the_outlier() {
        let x = matrix(&[&[1.0], &[2.0], &[3.0], &[100.0]]);
        assert_eq!(featurewise_median(&x).0, vec![2.0]);
    }

    #[test]
    fn centering_by_zero_is_identity() {
        let x = matrix(&[&[1.0, -2.0], &[3.5, 4.0]]);
        let c = center(&x, &CenterVector::zeros(2)).unwrap();
        assert_eq!(c, x);
    }

    #[test]
    fn centering_subtracts_exactly() {
        let x = matrix(&[&[1.0, 1.0], &[3.0, 3.0]]);
        let c = center(&x, &CenterVector(vec![2.0, 2.0])).unwrap();
        assert_eq!(c.row(0), &[-1.0, -1.0]);
        assert_eq!(c.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn recentring_gives_exactly_zero_median() {
        let x = matrix(&[
            &[0.3, -1.0, 5.0],
            &[2.0, 0.4, -3.0],
            &[-7.0, 2.2, 0.0],
            &[1.1, 9.0, 2.5],
        ]);
        let mu = featurewise_median(&x);
        let centered = center(&x, &mu).unwrap();
        assert_eq!(featurewise_median(&centered).0, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = matrix(&[&[1.0, 2.0]]);
        assert!(center(&x, &CenterVector(vec![0.0])).is_err());
    }
}
