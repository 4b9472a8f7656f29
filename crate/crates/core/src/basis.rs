//! Column-orthonormal bases and the projector/residual operations built on
//! them. A `Basis` V represents the rank-d projector Q = V V^T without ever
//! forming the p x p matrix.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// p x d matrix with orthonormal columns, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis<T> {
    ambient: usize,
    dim: usize,
    /// Column-major: column k occupies `cols[k*ambient .. (k+1)*ambient]`.
    cols: Vec<T>,
}

impl<T: Scalar> Basis<T> {
    /// Wraps columns that are already orthonormal; checked in debug builds.
    pub(crate) fn from_orthonormal_columns(ambient: usize, dim: usize, cols: Vec<T>) -> Self {
        debug_assert_eq!(cols.len(), ambient * dim);
        let basis = Self { ambient, dim, cols };
        debug_assert!(
            basis.orthonormality_residual() <= T::ORTHO_TOL,
            "columns not orthonormal: residual {:?}",
            basis.orthonormality_residual()
        );
        basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn subspace_dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn column(&self, k: usize) -> &[T] {
        &self.cols[k * self.ambient..(k + 1) * self.ambient]
    }

    /// Column-major backing storage, length `ambient * dim`.
    pub fn columns_flat(&self) -> &[T] {
        &self.cols
    }

    pub fn into_columns_flat(self) -> Vec<T> {
        self.cols
    }

    /// Frobenius norm of V^T V - I.
    pub fn orthonormality_residual(&self) -> T {
        let mut acc = T::zero();
        for a in 0..self.dim {
            let ca = self.column(a);
            for b in 0..=a {
                let dot = dot(ca, self.column(b));
                let target = if a == b { T::one() } else { T::zero() };
                let diff = dot - target;
                let sq = diff * diff;
                acc += if a == b { sq } else { sq + sq };
            }
        }
        acc.sqrt()
    }

    /// s = V^T x (the d coordinates of x in this basis).
    pub fn coordinates(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_ambient(x.len())?;
        Ok((0..self.dim).map(|k| dot(self.column(k), x)).collect())
    }

    /// Q x = V (V^T x), never materializing Q.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        let coords = self.coordinates(x)?;
        let mut out = vec![T::zero(); self.ambient];
        self.expand_into(&coords, &mut out);
        Ok(out)
    }

    /// out = V s for coordinates s.
    pub(crate) fn expand_into(&self, coords: &[T], out: &mut [T]) {
        debug_assert_eq!(coords.len(), self.dim);
        debug_assert_eq!(out.len(), self.ambient);
        out.iter_mut().for_each(|v| *v = T::zero());
        for (k, &c) in coords.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(self.column(k)) {
                *o += c * v;
            }
        }
    }

    /// Squared residual x^T (I - V V^T) x = ||x||^2 - ||V^T x||^2, clamped at
    /// zero against roundoff.
    pub fn residual(&self, x: &[T]) -> Result<T> {
        self.check_ambient(x.len())?;
        Ok(self.residual_unchecked(x))
    }

    #[inline]
    pub(crate) fn residual_unchecked(&self, x: &[T]) -> T {
        let norm_sq = dot(x, x);
        let mut proj_sq = T::zero();
        for k in 0..self.dim {
            let c = dot(self.column(k), x);
            proj_sq += c * c;
        }
        let r = norm_sq - proj_sq;
        if r < T::zero() {
            if r > T::from_f64_lossy(-1e-10) * norm_sq.max(T::one()) {
                T::zero()
            } else {
                // a residual this negative means the basis is broken
                debug_assert!(false, "residual {r:?} on norm {norm_sq:?}");
                T::zero()
            }
        } else {
            r
        }
    }

    fn check_ambient(&self, got: usize) -> Result<()> {
        if got != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got,
                context: "vector vs basis ambient dimension",
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Orthonormalizes the columns of a p x d matrix (column-major input) by
/// modified Gram-Schmidt with one full re-orthogonalization pass.
///
/// Fails with [`Error::RankDeficient`] when a column's residual norm falls
/// below `RANK_TOL` times its original norm, i.e. the columns are (numerically)
/// linearly dependent.
pub fn gram_schmidt_orthonormalize<T: Scalar>(
    ambient: usize,
    dim: usize,
    col_major: &[T],
) -> Result<Basis<T>> {
    if dim == 0 || ambient < dim {
        return Err(Error::InvalidInput(format!(
            "need ambient >= dim >= 1, got ambient {ambient}, dim {dim}"
        )));
    }
    if col_major.len() != ambient * dim {
        return Err(Error::InvalidInput(format!(
            "expected {} column-major entries, got {}",
            ambient * dim,
            col_major.len()
        )));
    }
    let mut cols = col_major.to_vec();
    let original_norms: Vec<T> = (0..dim)
        .map(|k| dot(&cols[k * ambient..(k + 1) * ambient], &cols[k * ambient..(k + 1) * ambient]).sqrt())
        .collect();

    for k in 0..dim {
        // two passes of projection removal: MGS then a re-orthogonalization
        for _pass in 0..2 {
            for j in 0..k {
                let proj = {
                    let (head, tail) = cols.split_at(k * ambient);
                    dot(&head[j * ambient..(j + 1) * ambient], &tail[..ambient])
                };
                let (head, tail) = cols.split_at_mut(k * ambient);
                let prev = &head[j * ambient..(j + 1) * ambient];
                for (c, &q) in tail[..ambient].iter_mut().zip(prev) {
                    *c -= proj * q;
                }
            }
        }
        let col = &mut cols[k * ambient..(k + 1) * ambient];
        let norm = dot(col, col).sqrt();
        let floor = T::RANK_TOL * original_norms[k].max(T::min_positive_value());
        if norm <= floor {
            return Err(Error::RankDeficient { column: k });
        }
        let inv = T::one() / norm;
        for c in col.iter_mut() {
            *c *= inv;
        }
    }
    Ok(Basis::from_orthonormal_columns(ambient, dim, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn already_orthonormal_columns_pass_through() {
        // first two canonical columns of R^3
        let m = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let b = gram_schmidt_orthonormalize(3, 2, &m).unwrap();
        assert_eq!(b.columns_flat(), &m);
    }

    #[test]
    fn scaling_only_columns_are_normalized() {
        // columns (2,0,0) and (0,0,3)
        let m = [2.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        let b = gram_schmidt_orthonormalize(3, 2, &m).unwrap();
        assert_eq!(b.columns_flat(), &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let m = [1.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        match gram_schmidt_orthonormalize(3, 2, &m) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn projector_along_e1_zeroes_other_coordinates() {
        let b = gram_schmidt_orthonormalize(2, 1, &[1.0, 0.0]).unwrap();
        assert_eq!(b.project(&[3.0, 4.0]).unwrap(), vec![3.0, 0.0]);
        assert_abs_diff_eq!(b.residual(&[3.0, 4.0]).unwrap(), 16.0);
    }

    #[test]
    fn full_rank_projector_is_identity() {
        let m = [0.5, 0.5, -0.25, 0.9]; // any invertible 2x2
        let b = gram_schmidt_orthonormalize(2, 2, &m).unwrap();
        let x = [1.7, -2.3];
        let px = b.project(&x).unwrap();
        assert_abs_diff_eq!(px[0], x[0], epsilon = 1e-12);
        assert_abs_diff_eq!(px[1], x[1], epsilon = 1e-12);
        assert_abs_diff_eq!(b.residual(&x).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_of_in_span_and_orthogonal_vectors() {
        let b = gram_schmidt_orthonormalize(3, 1, &[0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(b.residual(&[0.0, 5.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(b.residual(&[3.0, 0.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let b = gram_schmidt_orthonormalize(3, 1, &[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            b.residual(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
