//! Symmetric eigensolvers.
//!
//! [`top_eigenvectors`] runs orthogonal (subspace) iteration with the crate's
//! Gram-Schmidt retraction and Rayleigh-Ritz extraction. Clustered spectra can
//! stall that iteration, so a cyclic Jacobi sweep over the full matrix backs
//! it up whenever the residual trend predicts the cap will be missed; either
//! path must meet the same per-pair residual target
//! `||S v - lambda v|| <= EIG_TOL * ||S||_F`.

use crate::basis::{dot, gram_schmidt_orthonormalize, Basis};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::rng::{self, stream};
use crate::scalar::Scalar;

/// Fixed internal seed for the iteration's starting block. Any fixed value
/// works; it only has to make the solver a pure function of its inputs.
const START_SEED: u64 = 0x0EE1_7A11;

const JACOBI_MAX_SWEEPS: usize = 60;

/// Computes the `d` eigenvectors of the largest eigenvalues of a symmetric
/// matrix, eigenvalues sorted descending.
///
/// The sign of each eigenvector is fixed so its largest-magnitude entry is
/// positive, making the output deterministic.
pub fn top_eigenvectors<T: Scalar>(
    s: &SymmetricMatrix<T>,
    d: usize,
) -> Result<(Basis<T>, Vec<T>)> {
    let p = s.dim();
    if d == 0 || d > p {
        return Err(Error::InvalidInput(format!(
            "need 1 <= d <= p, got d={d}, p={p}"
        )));
    }
    let norm = s.frobenius_norm();
    if norm == T::zero() {
        // the zero matrix: every orthonormal frame is an eigenbasis
        let mut cols = vec![T::zero(); p * d];
        for k in 0..d {
            cols[k * p + k] = T::one();
        }
        return Ok((
            Basis::from_orthonormal_columns(p, d, cols),
            vec![T::zero(); d],
        ));
    }

    if let Some(out) = subspace_iteration(s, d, norm)? {
        return Ok(out);
    }
    jacobi_top(s, d)
}

/// Eigenvalues of a symmetric matrix, sorted descending, via cyclic Jacobi.
pub fn eigenvalues_symmetric<T: Scalar>(s: &SymmetricMatrix<T>) -> Result<Vec<T>> {
    let p = s.dim();
    let mut dense = s.to_dense();
    jacobi_sweeps(&mut dense, None, p)?;
    let mut vals: Vec<T> = (0..p).map(|i| dense[i * p + i]).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(vals)
}

/// One orthogonal-iteration attempt. Returns `Ok(None)` when the residual
/// trend says the iteration cap will be missed (clustered spectrum).
fn subspace_iteration<T: Scalar>(
    s: &SymmetricMatrix<T>,
    d: usize,
    norm: T,
) -> Result<Option<(Basis<T>, Vec<T>)>> {
    let p = s.dim();
    // a wider working block sharpens convergence of the top-d pairs
    let m = (2 * d).min(p);
    let cap = 10 * p;
    let tol = T::EIG_TOL * norm;
    let shift = negative_shift(s, norm) + T::from_f64_lossy(1e-8) * norm;

    let mut rng = rng::CounterRng::new(START_SEED, stream::EIGEN_INIT);
    let start: Vec<T> = (0..p * m)
        .map(|_| T::from_f64_lossy(rng.next_gaussian()))
        .collect();
    let mut v = gram_schmidt_orthonormalize(p, m, &start)?;

    let mut w = vec![T::zero(); p * m];
    let mut residual_log: Vec<T> = Vec::with_capacity(cap);
    for _ in 0..cap {
        // w = S v, one column at a time
        for k in 0..m {
            s.mul_vec(v.column(k), &mut w[k * p..(k + 1) * p]);
        }
        // Rayleigh-Ritz on the block: h = v^T w
        let mut h = vec![T::zero(); m * m];
        for a in 0..m {
            for b in 0..m {
                h[a * m + b] = dot(v.column(a), &w[b * p..(b + 1) * p]);
            }
        }
        let mut u = identity(m);
        jacobi_sweeps(&mut h, Some(&mut u), m)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            h[b * m + b]
                .partial_cmp(&h[a * m + a])
                .expect("ritz values are finite")
        });

        // rotated top-d Ritz pairs and their residuals, reusing w = S v
        let mut max_residual = T::zero();
        let mut ritz_vecs = vec![T::zero(); p * d];
        let mut ritz_vals = vec![T::zero(); d];
        for (slot, &k) in order.iter().take(d).enumerate() {
            let lambda = h[k * m + k];
            ritz_vals[slot] = lambda;
            let dst = &mut ritz_vecs[slot * p..(slot + 1) * p];
            let mut res_sq = T::zero();
            for i in 0..p {
                let mut vi = T::zero();
                let mut wi = T::zero();
                for a in 0..m {
                    let coef = u[a * m + k];
                    vi += coef * v.column(a)[i];
                    wi += coef * w[a * p + i];
                }
                dst[i] = vi;
                let r = wi - lambda * vi;
                res_sq += r * r;
            }
            max_residual = max_residual.max(res_sq.sqrt());
        }

        if max_residual <= tol {
            let basis = polish(p, d, ritz_vecs)?;
            return Ok(Some((basis, ritz_vals)));
        }
        residual_log.push(max_residual);
        if stalled(&residual_log, tol, cap) {
            return Ok(None);
        }

        // next block from the shifted product (S + shift I) v = w + shift v
        for k in 0..m {
            let col = v.column(k);
            for i in 0..p {
                w[k * p + i] += shift * col[i];
            }
        }
        v = match gram_schmidt_orthonormalize(p, m, &w) {
            Ok(next) => next,
            // the block collapsed (rank-deficient S); Jacobi handles it
            Err(Error::RankDeficient { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
    }
    Ok(None)
}

/// Predicts whether the residual trend can still reach `tol` before `cap`.
fn stalled<T: Scalar>(log: &[T], tol: T, cap: usize) -> bool {
    const WINDOW: usize = 20;
    const WARMUP: usize = 40;
    let t = log.len();
    if t < WARMUP || t % 10 != 0 {
        return false;
    }
    let now = log[t - 1].to_f64_lossy();
    let then = log[t - 1 - WINDOW].to_f64_lossy();
    if now <= 0.0 || then <= 0.0 {
        return false;
    }
    let rate = (now / then).powf(1.0 / WINDOW as f64);
    if rate >= 0.9995 {
        return true;
    }
    let needed = (tol.to_f64_lossy() / now).ln() / rate.ln();
    needed > (cap - t) as f64
}

/// Estimate of `max(0, -lambda_min)` so the iterated matrix is positive
/// semidefinite and eigenvalue order matches magnitude order. Power iteration
/// on `norm*I - S` (itself PSD) gives the most negative eigenvalue; for a PSD
/// input this comes out near zero and the fast unshifted path is kept.
fn negative_shift<T: Scalar>(s: &SymmetricMatrix<T>, norm: T) -> T {
    let p = s.dim();
    let mut rng = rng::CounterRng::new(START_SEED ^ 1, stream::EIGEN_INIT);
    let mut x: Vec<T> = (0..p)
        .map(|_| T::from_f64_lossy(rng.next_gaussian()))
        .collect();
    let mut sx = vec![T::zero(); p];
    let mut rayleigh = T::zero();
    for _ in 0..40 {
        s.mul_vec(&x, &mut sx);
        // y = (norm I - S) x
        for i in 0..p {
            sx[i] = norm * x[i] - sx[i];
        }
        let len = dot(&sx, &sx).sqrt();
        if len == T::zero() {
            return T::zero();
        }
        let inv = T::one() / len;
        for (xi, yi) in x.iter_mut().zip(&sx) {
            *xi = *yi * inv;
        }
        rayleigh = len; // ||y|| after normalized x approximates the eigenvalue
    }
    let lambda_min = norm - rayleigh;
    if lambda_min < T::zero() {
        -lambda_min * T::from_f64_lossy(1.1)
    } else {
        T::zero()
    }
}

/// Full Jacobi decomposition, keeping the top-d pairs.
fn jacobi_top<T: Scalar>(s: &SymmetricMatrix<T>, d: usize) -> Result<(Basis<T>, Vec<T>)> {
    let p = s.dim();
    let mut dense = s.to_dense();
    let mut vecs = identity(p);
    jacobi_sweeps(&mut dense, Some(&mut vecs), p)?;
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        dense[b * p + b]
            .partial_cmp(&dense[a * p + a])
            .expect("eigenvalues are finite")
    });
    let mut cols = vec![T::zero(); p * d];
    let mut vals = vec![T::zero(); d];
    for (slot, &k) in order.iter().take(d).enumerate() {
        vals[slot] = dense[k * p + k];
        for i in 0..p {
            cols[slot * p + i] = vecs[i * p + k];
        }
    }
    let basis = polish(p, d, cols)?;
    Ok((basis, vals))
}

/// Re-orthonormalizes (guarding accumulated roundoff) and applies the
/// largest-magnitude-entry-positive sign convention.
fn polish<T: Scalar>(p: usize, d: usize, cols: Vec<T>) -> Result<Basis<T>> {
    let basis = gram_schmidt_orthonormalize(p, d, &cols)?;
    let mut cols = basis.into_columns_flat();
    for k in 0..d {
        let col = &mut cols[k * p..(k + 1) * p];
        let mut arg = 0;
        for (i, c) in col.iter().enumerate() {
            if c.abs() > col[arg].abs() {
                arg = i;
            }
        }
        if col[arg] < T::zero() {
            for c in col.iter_mut() {
                *c = -*c;
            }
        }
    }
    Ok(Basis::from_orthonormal_columns(p, d, cols))
}

fn identity<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

/// Cyclic Jacobi sweeps on a dense row-major symmetric matrix, optionally
/// accumulating the rotations (columns of `vecs` become eigenvectors).
fn jacobi_sweeps<T: Scalar>(a: &mut [T], mut vecs: Option<&mut Vec<T>>, n: usize) -> Result<()> {
    if n <= 1 {
        return Ok(());
    }
    let norm = frob_dense(a, n);
    if norm == T::zero() {
        return Ok(());
    }
    // entries below `skip` are left untouched, so the reachable off-diagonal
    // mass is about n * skip; the sweep target sits safely above that
    let skip = T::epsilon() * norm * T::from_f64_lossy(0.5);
    let target = T::epsilon() * norm * T::from_usize(n).expect("small dimension");
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = a[i * n + j];
                off += v * v;
            }
        }
        if (off + off).sqrt() <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= skip {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::from_f64_lossy(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + T::one()).sqrt();
                    let t = T::one() / denom;
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    let new_p = aip - s * (aiq + tau * aip);
                    let new_q = aiq + s * (aip - tau * aiq);
                    a[i * n + p] = new_p;
                    a[p * n + i] = new_p;
                    a[i * n + q] = new_q;
                    a[q * n + i] = new_q;
                }
                if let Some(v) = vecs.as_deref_mut() {
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = vip - s * (viq + tau * vip);
                        v[i * n + q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }
    Err(Error::ConvergenceFailure {
        what: "jacobi eigensolver",
        iterations: JACOBI_MAX_SWEEPS,
    })
}

fn frob_dense<T: Scalar>(a: &[T], n: usize) -> T {
    let mut acc = T::zero();
    for i in 0..n * n {
        acc += a[i] * a[i];
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymmetricMatrix;
    use approx::assert_abs_diff_eq;

    fn diag(values: &[f64]) -> SymmetricMatrix<f64> {
        let mut s = SymmetricMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            s.set(i, i, v);
        }
        s
    }

    #[test]
    fn diagonal_matrix_returns_canonical_vectors() {
        let s = diag(&[3.0, 2.0, 1.0]);
        let (basis, vals) = top_eigenvectors(&s, 2).unwrap();
        assert_abs_diff_eq!(vals[0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(vals[1], 2.0, epsilon = 1e-9);
        for (k, e) in [(0usize, 0usize), (1, 1)] {
            for i in 0..3 {
                let want = if i == e { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(basis.column(k)[i], want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn indefinite_two_by_two_picks_the_positive_eigenvalue() {
        let mut s = SymmetricMatrix::zeros(2);
        s.set(1, 0, 1.0);
        let (basis, vals) = top_eigenvectors(&s, 1).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-9);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(basis.column(0)[0], inv_sqrt2, epsilon = 1e-8);
        assert_abs_diff_eq!(basis.column(0)[1], inv_sqrt2, epsilon = 1e-8);
    }

    #[test]
    fn residuals_meet_the_contract_on_a_random_matrix() {
        let mut rng = crate::rng::CounterRng::new(11, 1234);
        let p = 8;
        let mut s = SymmetricMatrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                s.set(i, j, rng.next_gaussian());
            }
        }
        let (basis, vals) = top_eigenvectors(&s, 3).unwrap();
        let norm = s.frobenius_norm();
        let mut sv = vec![0.0; p];
        for k in 0..3 {
            s.mul_vec(basis.column(k), &mut sv);
            let res: f64 = sv
                .iter()
                .zip(basis.column(k))
                .map(|(&a, &b)| (a - vals[k] * b) * (a - vals[k] * b))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-8 * norm, "pair {k}: residual {res}");
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn zero_matrix_yields_zero_eigenvalues() {
        let s = SymmetricMatrix::<f64>::zeros(4);
        let (basis, vals) = top_eigenvectors(&s, 2).unwrap();
        assert_eq!(vals, vec![0.0, 0.0]);
        assert!(basis.orthonormality_residual() <= 1e-12);
    }

    #[test]
    fn rank_deficient_matrix_still_solves_above_its_rank() {
        // rank-1 scatter, ask for d=3
        let x = crate::matrix::DataMatrix::new(1, 4, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let s = crate::matrix::scatter_matrix(&x);
        let (basis, vals) = top_eigenvectors(&s, 3).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0 + 4.0 + 1.0 + 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(vals[2], 0.0, epsilon = 1e-8);
        assert!(basis.orthonormality_residual() <= 1e-10);
    }

    #[test]
    fn eigenvalue_list_is_descending_and_complete() {
        let s = diag(&[1.0, 4.0, -2.0, 3.0]);
        let vals = eigenvalues_symmetric(&s).unwrap();
        assert_eq!(vals, vec![4.0, 3.0, 1.0, -2.0]);
    }
}
