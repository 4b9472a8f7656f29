//! Evaluation metrics and numerical evaluation of the concentration bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{dot, Basis};
use crate::eigen::eigenvalues_symmetric;
use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, SymmetricMatrix};
use crate::rng::{self, stream};
use crate::scalar::Scalar;

/// Frobenius error of the reconstruction against the clean ground truth,
/// restricted to inlier rows: ||recon - clean|| / ||clean||.
pub fn relative_reconstruction_error<T: Scalar>(
    recon: &DataMatrix<T>,
    clean: &DataMatrix<T>,
    inlier_rows: &[usize],
) -> Result<T> {
    if recon.n_rows() != clean.n_rows() || recon.n_cols() != clean.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: clean.n_rows() * clean.n_cols(),
            got: recon.n_rows() * recon.n_cols(),
            context: "reconstruction vs ground truth shape",
        });
    }
    if inlier_rows.is_empty() {
        return Err(Error::EmptyInlierSet);
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for &i in inlier_rows {
        for (&a, &b) in recon.row(i).iter().zip(clean.row(i)) {
            let d = a - b;
            num += d * d;
            den += b * b;
        }
    }
    Ok((num / den).sqrt())
}

/// Distance between two subspaces of the same dimension: the Frobenius norm
/// of the projector difference and the largest principal angle, both derived
/// from the singular values of V1^T V2.
pub fn subspace_distance<T: Scalar>(v1: &Basis<T>, v2: &Basis<T>) -> Result<(T, T)> {
    if v1.ambient_dim() != v2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: v1.ambient_dim(),
            got: v2.ambient_dim(),
            context: "subspace ambient dimensions",
        });
    }
    if v1.subspace_dim() != v2.subspace_dim() {
        return Err(Error::DimensionMismatch {
            expected: v1.subspace_dim(),
            got: v2.subspace_dim(),
            context: "subspace dimensions",
        });
    }
    let cosines = principal_cosines(v1, v2)?;
    let d = v1.subspace_dim();
    // ||Q1 - Q2||_F^2 = 2d - 2 sum cos^2(theta_i)
    let sum_sq: T = cosines.iter().map(|&c| c * c).sum();
    let frob = ((T::from_usize(2 * d).expect("small dimension") - (sum_sq + sum_sq))
        .max(T::zero()))
    .sqrt();
    let min_cos = cosines
        .iter()
        .copied()
        .fold(T::one(), |acc, c| acc.min(c))
        .clamp(T::zero(), T::one());
    Ok((frob, min_cos.acos()))
}

/// Largest principal angle only.
pub fn max_principal_angle<T: Scalar>(v1: &Basis<T>, v2: &Basis<T>) -> Result<T> {
    Ok(subspace_distance(v1, v2)?.1)
}

/// Cosines of the principal angles, descending, clamped to [0, 1]. Computed
/// from the eigenvalues of (V1^T V2)^T (V1^T V2).
fn principal_cosines<T: Scalar>(v1: &Basis<T>, v2: &Basis<T>) -> Result<Vec<T>> {
    let d = v1.subspace_dim();
    let mut m = vec![T::zero(); d * d];
    for a in 0..d {
        for b in 0..d {
            m[a * d + b] = dot(v1.column(a), v2.column(b));
        }
    }
    let mut gram = SymmetricMatrix::zeros(d);
    for i in 0..d {
        for j in 0..=i {
            let mut acc = T::zero();
            for k in 0..d {
                acc += m[k * d + i] * m[k * d + j];
            }
            gram.set(i, j, acc);
        }
    }
    let eigs = eigenvalues_symmetric(&gram)?;
    Ok(eigs
        .into_iter()
        .map(|l| l.clamp(T::zero(), T::one()).sqrt())
        .collect())
}

/// Precision / recall / F1 with the zero-denominator convention: an undefined
/// metric is reported as 0 and flagged instead of becoming NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

pub fn precision_recall_f1(predicted: &[bool], truth: &[bool]) -> Result<PrfScores> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision_undefined = tp + fp == 0;
    let recall_undefined = tp + fn_ == 0;
    let precision = if precision_undefined {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if recall_undefined {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1_undefined = precision + recall == 0.0;
    let f1 = if f1_undefined {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(PrfScores {
        precision,
        recall,
        f1,
        precision_undefined,
        recall_undefined,
        f1_undefined,
    })
}

/// Closed-form complexity bound sqrt((p - d) * mu4 / m) for the residual
/// function class over rank-d projectors.
pub fn rademacher_bound(p: usize, d: usize, mu4: f64, m: usize) -> Result<f64> {
    if d > p {
        return Err(Error::InvalidInput(format!("d={d} exceeds p={p}")));
    }
    if !(mu4 >= 0.0) || !mu4.is_finite() {
        return Err(Error::InvalidInput(format!(
            "fourth moment {mu4} must be finite and >= 0"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidInput("sample size m must be >= 1".into()));
    }
    Ok(((p - d) as f64 * mu4 / m as f64).sqrt())
}

/// Monte-Carlo estimate of the empirical Rademacher complexity of the
/// residual class, with the per-draw supremum evaluated exactly.
///
/// For fixed signs the supremum has a closed form: with M = sum_i s_i y_i y_i^T,
///
/// ```text
/// sup_Q sum_i s_i (||y_i||^2 - y_i^T Q y_i) = sum_i s_i ||y_i||^2 - min_Q <M, Q>
/// ```
///
/// and since <M, Q> is linear in Q over the rank-d projector set, whose
/// extreme points are the rank-d spectral projectors, the minimum is the sum
/// of the d smallest eigenvalues of M. Each draw therefore needs one
/// symmetric eigensolve and no optimization.
pub fn empirical_rademacher_complexity<T: Scalar>(
    y: &DataMatrix<T>,
    d: usize,
    n_draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let m = y.n_rows();
    let p = y.n_cols();
    if d == 0 || d > p {
        return Err(Error::InvalidInput(format!(
            "need 1 <= d <= p, got d={d}, p={p}"
        )));
    }
    if n_draws == 0 {
        return Err(Error::InvalidInput("need at least one sign draw".into()));
    }

    let norms_sq: Vec<f64> = y
        .rows_iter()
        .map(|row| dot(row, row).to_f64_lossy())
        .collect();

    let sups: Vec<f64> = (0..n_draws)
        .into_par_iter()
        .map(|draw| -> Result<f64> {
            let base = (draw * m) as u64;
            let mut signed_sum = 0.0;
            let mut scatter = SymmetricMatrix::<f64>::zeros(p);
            for i in 0..m {
                let s = rng::sign(seed, stream::RADEMACHER, base + i as u64);
                signed_sum += s * norms_sq[i];
                let row = y.row(i);
                for a in 0..p {
                    let xa = s * row[a].to_f64_lossy();
                    for b in 0..=a {
                        scatter.set(a, b, scatter.get(a, b) + xa * row[b].to_f64_lossy());
                    }
                }
            }
            let eigs = eigenvalues_symmetric(&scatter)?;
            let smallest: f64 = eigs.iter().rev().take(d).sum();
            Ok((signed_sum - smallest) / m as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mean = sups.iter().sum::<f64>() / n_draws as f64;
    let var = sups.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (n_draws.max(2) - 1) as f64;
    let std_error = (var / n_draws as f64).sqrt();
    Ok((mean, std_error))
}

/// Evaluated theoretical quantities with the inputs they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: usize,
    pub d: usize,
    pub mu2: f64,
    pub mu4: f64,
    pub n: usize,
    pub l: usize,
    pub n_outliers: usize,
    pub n_inliers: usize,
    pub eta_slack: f64,
    /// sqrt((p - d) mu4 / m) at the inlier sample size.
    pub rademacher_bound: f64,
    /// C(P) = (mu4 + 2 mu2^2)(p - d) + (mu2^2 - 1)(p - d)^2.
    pub c_of_p: f64,
    /// C = 2 max{ sqrt(8 (4+eta) C(P) / eta), 16 sqrt((p-d) mu4) (4+eta) / eta }.
    pub c_const: f64,
    /// C * max{ sqrt(L/N), sqrt(|I|)/N }.
    pub deviation_bound: f64,
    /// 1 - 2 exp(-2 L (2/(4+eta) - |O|/L)^2), clamped to [0, 1].
    pub success_probability: f64,
}

/// Evaluates the deviation bound and its companion quantities.
///
/// Preconditions mirror the assumptions behind the bound: inliers i.i.d. with
/// the supplied moments, and enough blocks that a majority are outlier-free
/// (`L > (2 + eta_slack) * n_outliers`), plus `N > L`.
#[allow(clippy::too_many_arguments)]
pub fn deviation_bound(
    p: usize,
    d: usize,
    mu2: f64,
    mu4: f64,
    n: usize,
    l: usize,
    n_outliers: usize,
    n_inliers: usize,
    eta_slack: f64,
) -> Result<BoundReport> {
    if d > p {
        return Err(Error::InvalidInput(format!("d={d} exceeds p={p}")));
    }
    if !(eta_slack > 0.0) || !eta_slack.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eta_slack {eta_slack} must be > 0"
        )));
    }
    if !(mu2 >= 0.0 && mu4 >= 0.0) || !mu2.is_finite() || !mu4.is_finite() {
        return Err(Error::InvalidInput("moments must be finite and >= 0".into()));
    }
    if n_inliers + n_outliers != n {
        return Err(Error::InvalidInput(format!(
            "inliers {n_inliers} + outliers {n_outliers} must equal N={n}"
        )));
    }
    if l as f64 <= (2.0 + eta_slack) * n_outliers as f64 {
        return Err(Error::AssumptionViolated(format!(
            "majority-of-clean-blocks condition L > (2 + eta) |O| fails: \
             L={l}, eta={eta_slack}, |O|={n_outliers}"
        )));
    }
    if n <= l {
        return Err(Error::AssumptionViolated(format!(
            "need more observations than blocks: N={n}, L={l}"
        )));
    }
    evaluate_bounds(p, d, mu2, mu4, n, l, n_outliers, n_inliers, eta_slack)
}

/// [`deviation_bound`] with the assumption checks skipped: the printed
/// formulas evaluated as-is, for diagnostics on configurations the bound
/// does not actually cover.
#[allow(clippy::too_many_arguments)]
pub fn deviation_bound_unchecked(
    p: usize,
    d: usize,
    mu2: f64,
    mu4: f64,
    n: usize,
    l: usize,
    n_outliers: usize,
    n_inliers: usize,
    eta_slack: f64,
) -> Result<BoundReport> {
    if d > p {
        return Err(Error::InvalidInput(format!("d={d} exceeds p={p}")));
    }
    if !(eta_slack > 0.0) || !eta_slack.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eta_slack {eta_slack} must be > 0"
        )));
    }
    evaluate_bounds(p, d, mu2, mu4, n, l, n_outliers, n_inliers, eta_slack)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_bounds(
    p: usize,
    d: usize,
    mu2: f64,
    mu4: f64,
    n: usize,
    l: usize,
    n_outliers: usize,
    n_inliers: usize,
    eta_slack: f64,
) -> Result<BoundReport> {
    if n_inliers == 0 {
        return Err(Error::EmptyInlierSet);
    }

    let gap = (p - d) as f64;
    let c_of_p = (mu4 + 2.0 * mu2 * mu2) * gap + (mu2 * mu2 - 1.0) * gap * gap;
    let c_const = 2.0
        * f64::max(
            (8.0 * (4.0 + eta_slack) * c_of_p / eta_slack).sqrt(),
            16.0 * (gap * mu4).sqrt() * (4.0 + eta_slack) / eta_slack,
        );
    let rate = f64::max(
        (l as f64 / n as f64).sqrt(),
        (n_inliers as f64).sqrt() / n as f64,
    );
    let deviation = c_const * rate;
    let margin = 2.0 / (4.0 + eta_slack) - n_outliers as f64 / l as f64;
    let success = (1.0 - 2.0 * (-2.0 * l as f64 * margin * margin).exp()).clamp(0.0, 1.0);
    let rad = rademacher_bound(p, d, mu4, n_inliers)?;

    Ok(BoundReport {
        p,
        d,
        mu2,
        mu4,
        n,
        l,
        n_outliers,
        n_inliers,
        eta_slack,
        rademacher_bound: rad,
        c_of_p,
        c_const,
        deviation_bound: deviation,
        success_probability: success,
    })
}

/// Sample moments mu2_hat and mu4_hat of the row norms.
pub fn sample_moments<T: Scalar>(x: &DataMatrix<T>, rows: Option<&[usize]>) -> (f64, f64) {
    let norm_sq = |i: usize| dot(x.row(i), x.row(i)).to_f64_lossy();
    let (count, sum2, sum4) = match rows {
        Some(rows) => {
            let mut s2 = 0.0;
            let mut s4 = 0.0;
            for &i in rows {
                let v = norm_sq(i);
                s2 += v;
                s4 += v * v;
            }
            (rows.len(), s2, s4)
        }
        None => {
            let mut s2 = 0.0;
            let mut s4 = 0.0;
            for i in 0..x.n_rows() {
                let v = norm_sq(i);
                s2 += v;
                s4 += v * v;
            }
            (x.n_rows(), s2, s4)
        }
    };
    (sum2 / count as f64, sum4 / count as f64)
}
