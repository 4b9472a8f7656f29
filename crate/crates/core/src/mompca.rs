//! Median-of-means subspace fitting.
//!
//! The empirical objective splits the sample into L equal blocks, averages the
//! squared projection residual within each block, and takes the median across
//! blocks. Only the median block drives each gradient step, which is what
//! makes the fit insensitive to anything a minority of blocks contains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{dot, gram_schmidt_orthonormalize, Basis};
use crate::eigen::top_eigenvectors;
use crate::error::{Error, Result};
use crate::matrix::{scatter_matrix, DataMatrix};
use crate::model::{FitReport, MompcaModel};
use crate::preprocess::{center, featurewise_median, CenterVector};
use crate::rng::{self, stream};
use crate::scalar::Scalar;

/// Seeded assignment of observation indices into L equal-size blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPlan {
    block_count: usize,
    block_size: usize,
    /// Concatenated blocks: block l is `indices[l*B .. (l+1)*B]`.
    indices: Vec<usize>,
    dropped: Vec<usize>,
    seed: u64,
}

impl PartitionPlan {
    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block(&self, l: usize) -> &[usize] {
        &self.indices[l * self.block_size..(l + 1) * self.block_size]
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Randomly partitions `{0, .., n-1}` into L blocks of exactly floor(n/L)
/// indices; the `n mod L` tail of the seeded permutation is dropped.
pub fn partition(n: usize, l: usize, seed: u64) -> Result<PartitionPlan> {
    partition_with_stream(n, l, seed, stream::PARTITION)
}

fn partition_with_stream(n: usize, l: usize, seed: u64, stream_id: u64) -> Result<PartitionPlan> {
    if l < 1 || l > n {
        return Err(Error::InvalidBlockCount { l, n });
    }
    let block_size = n / l;
    let mut perm: Vec<usize> = (0..n).collect();
    rng::CounterRng::new(seed, stream_id).shuffle(&mut perm);
    let dropped = perm.split_off(l * block_size);
    Ok(PartitionPlan {
        block_count: l,
        block_size,
        indices: perm,
        dropped,
        seed,
    })
}

/// Mean squared residual of one block: (1/B) sum_{i in B_l} g_V(x_i).
pub fn block_objective<T: Scalar>(
    x: &DataMatrix<T>,
    plan: &PartitionPlan,
    l: usize,
    basis: &Basis<T>,
) -> Result<T> {
    if basis.ambient_dim() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            got: basis.ambient_dim(),
            context: "basis vs data feature count",
        });
    }
    Ok(block_mean_residual(x, plan.block(l), basis))
}

fn block_mean_residual<T: Scalar>(x: &DataMatrix<T>, block: &[usize], basis: &Basis<T>) -> T {
    let total: T = block
        .iter()
        .map(|&i| basis.residual_unchecked(x.row(i)))
        .sum();
    total / T::from_usize(block.len()).expect("block size fits the scalar")
}

/// Lower median with deterministic ties: values are stably sorted ascending,
/// rank floor((L-1)/2) picks the median value (so the result always names a
/// real block), and among blocks tied at that value the lowest original block
/// index wins.
pub fn median_block<T: Scalar>(values: &[T]) -> (usize, T) {
    assert!(!values.is_empty(), "median of zero blocks");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("objectives are finite"));
    let val = sorted[(values.len() - 1) / 2];
    let idx = values
        .iter()
        .position(|&v| v == val)
        .expect("median value comes from the input");
    (idx, val)
}

/// All block objectives at the current basis, in block order.
pub fn block_objectives<T: Scalar>(
    x: &DataMatrix<T>,
    plan: &PartitionPlan,
    basis: &Basis<T>,
) -> Result<Vec<T>> {
    if basis.ambient_dim() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            got: basis.ambient_dim(),
            context: "basis vs data feature count",
        });
    }
    Ok((0..plan.block_count())
        .into_par_iter()
        .map(|l| block_mean_residual(x, plan.block(l), basis))
        .collect())
}

/// The median-of-means objective: median over blocks of the block means.
pub fn mom_objective<T: Scalar>(
    x: &DataMatrix<T>,
    plan: &PartitionPlan,
    basis: &Basis<T>,
) -> Result<T> {
    let values = block_objectives(x, plan, basis)?;
    Ok(median_block(&values).1)
}

/// One gradient step: recomputes the median block at the current basis, forms
/// V + eta * S_med V with S_med the median block's mean scatter (never
/// materialized), and retracts back onto orthonormal columns.
pub fn gradient_step<T: Scalar>(
    x: &DataMatrix<T>,
    plan: &PartitionPlan,
    basis: &Basis<T>,
    eta: T,
) -> Result<Basis<T>> {
    let values = block_objectives(x, plan, basis)?;
    let (l_med, _) = median_block(&values);
    step_with_block(x, plan.block(l_med), basis, eta, plan.seed())
}

fn step_with_block<T: Scalar>(
    x: &DataMatrix<T>,
    block: &[usize],
    basis: &Basis<T>,
    eta: T,
    seed: u64,
) -> Result<Basis<T>> {
    let p = basis.ambient_dim();
    let d = basis.subspace_dim();
    let scale = eta / T::from_usize(block.len()).expect("block size fits the scalar");

    // w = v + (eta/B) sum_i x_i (x_i^T v), accumulated column-major
    let mut w = basis.columns_flat().to_vec();
    for &i in block {
        let row = x.row(i);
        for k in 0..d {
            let coef = scale * dot(row, basis.column(k));
            let col = &mut w[k * p..(k + 1) * p];
            for (o, &xi) in col.iter_mut().zip(row) {
                *o += coef * xi;
            }
        }
    }

    match gram_schmidt_orthonormalize(p, d, &w) {
        Ok(next) => Ok(next),
        Err(Error::RankDeficient { column }) => {
            // replace the collapsed column with a fresh seeded draw, retry once
            let mut rng = rng::CounterRng::new(seed, stream::RANK_RECOVERY);
            for slot in &mut w[column * p..(column + 1) * p] {
                *slot = T::from_f64_lossy(rng.next_gaussian());
            }
            gram_schmidt_orthonormalize(p, d, &w)
        }
        Err(e) => Err(e),
    }
}

/// All tunables of the fit loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig<T> {
    /// Target subspace dimension d.
    pub subspace_dim: usize,
    /// Block count L.
    pub block_count: usize,
    /// Step size; `None` selects the scale-free default at fit time.
    pub eta: Option<T>,
    /// Relative objective tolerance for the stopping test.
    pub tol: T,
    pub max_iter: usize,
    pub seed: u64,
    /// Median-center the data before fitting (the robust default).
    pub centering: bool,
    /// Redraw the partition each iteration (experimental; off by default).
    pub repartition_each_iter: bool,
}

impl<T: Scalar> FitConfig<T> {
    pub fn new(subspace_dim: usize, block_count: usize) -> Self {
        Self {
            subspace_dim,
            block_count,
            eta: None,
            tol: T::from_f64_lossy(1e-7),
            max_iter: 500,
            seed: 0,
            centering: true,
            repartition_each_iter: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn without_centering(mut self) -> Self {
        self.centering = false;
        self
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if self.subspace_dim < 1 || self.subspace_dim > p {
            return Err(Error::InvalidInput(format!(
                "subspace dimension {} outside 1..={p}",
                self.subspace_dim
            )));
        }
        if self.block_count < 1 || self.block_count > n {
            return Err(Error::InvalidBlockCount {
                l: self.block_count,
                n,
            });
        }
        if let Some(eta) = self.eta {
            if !(eta > T::zero()) || !eta.is_finite() {
                return Err(Error::InvalidInput(format!("step size {eta} must be > 0")));
            }
        }
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tolerance {} must be > 0",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Fits a median-of-means PCA model.
///
/// Pipeline: median-center (optional), draw one partition, initialize from
/// the top-d eigenvectors of the full scatter, then iterate median-block
/// gradient steps until the objective's relative change drops below `tol` or
/// `max_iter` is hit. Because the median block can switch between iterations
/// the trace need not be monotone; the model keeps the best iterate seen.
pub fn fit<T: Scalar>(x: &DataMatrix<T>, config: &FitConfig<T>) -> Result<MompcaModel<T>> {
    let n = x.n_rows();
    let p = x.n_cols();
    config.validate(n, p)?;

    let mu = if config.centering {
        featurewise_median(x)
    } else {
        CenterVector::zeros(p)
    };
    let centered = center(x, &mu)?;

    let plan = partition(n, config.block_count, config.seed)?;
    let (v0, _eigenvalues) = top_eigenvectors(&scatter_matrix(&centered), config.subspace_dim)?;

    let mut v = v0;
    let mut plan_t = plan;
    let mut objective_trace = Vec::with_capacity(config.max_iter + 1);
    let mut median_trace = Vec::with_capacity(config.max_iter + 1);

    let values = block_objectives(&centered, &plan_t, &v)?;
    let (mut l_med, mut objective) = median_block(&values);
    objective_trace.push(objective);
    median_trace.push(l_med);

    // The scale-free default step: the reciprocal of the median over blocks
    // of each block's top mean-scatter eigenvalue, so (I + eta * S_med) is a
    // well-conditioned subspace-iteration map. Scaling to the full scatter
    // instead would shrink the step by the (possibly huge) outlier energy,
    // and any single block may itself be contaminated; the median is robust
    // under the same majority-of-clean-blocks condition as the objective.
    let eta = match config.eta {
        Some(eta) => eta,
        None => {
            let tops: Vec<T> = (0..plan_t.block_count())
                .into_par_iter()
                .map(|l| block_top_eigenvalue(&centered, plan_t.block(l)))
                .collect();
            default_eta(median_block(&tops).1)
        }
    };

    let mut best_v = v.clone();
    let mut best_objective = objective;
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..config.max_iter {
        debug_assert!(
            v.orthonormality_residual() <= T::ORTHO_TOL,
            "iterate {t} lost orthonormality"
        );
        v = step_with_block(&centered, plan_t.block(l_med), &v, eta, config.seed)?;
        iterations += 1;

        if config.repartition_each_iter {
            plan_t = partition_with_stream(
                n,
                config.block_count,
                config.seed,
                stream::REPARTITION + t as u64 + 1,
            )?;
        }

        let values = block_objectives(&centered, &plan_t, &v)?;
        let (l_new, obj_new) = median_block(&values);
        objective_trace.push(obj_new);
        median_trace.push(l_new);
        if obj_new < best_objective {
            best_objective = obj_new;
            best_v = v.clone();
        }

        let prev = objective;
        l_med = l_new;
        objective = obj_new;
        if (obj_new - prev).abs() <= config.tol * T::one().max(prev.abs()) {
            converged = true;
            break;
        }
    }

    debug_assert!(best_v.orthonormality_residual() <= T::ORTHO_TOL);
    let report = FitReport {
        iterations_run: iterations,
        objective_trace,
        median_block_trace: median_trace,
        converged,
    };
    Ok(MompcaModel::new(
        best_v,
        mu,
        FitConfig {
            eta: Some(eta),
            ..config.clone()
        },
        report,
    ))
}

fn default_eta<T: Scalar>(top_block_eigenvalue: T) -> T {
    if top_block_eigenvalue > T::from_f64_lossy(1e-30) {
        T::one() / top_block_eigenvalue
    } else {
        T::one()
    }
}

/// Top eigenvalue of a block's mean scatter (1/B) sum_{i in block} x_i x_i^T,
/// by power iteration that never materializes the p x p matrix. Only an
/// order-of-magnitude estimate is needed, so a fixed iteration count with a
/// deterministic start suffices.
fn block_top_eigenvalue<T: Scalar>(x: &DataMatrix<T>, block: &[usize]) -> T {
    let p = x.n_cols();
    let inv_b = T::one() / T::from_usize(block.len()).expect("block size fits the scalar");
    let mut rng = rng::CounterRng::new(0x57E9, stream::EIGEN_INIT);
    let mut v: Vec<T> = (0..p)
        .map(|_| T::from_f64_lossy(rng.next_gaussian()))
        .collect();
    let mut w = vec![T::zero(); p];
    let mut lambda = T::zero();
    for _ in 0..30 {
        w.iter_mut().for_each(|o| *o = T::zero());
        for &i in block {
            let row = x.row(i);
            let coef = dot(row, &v) * inv_b;
            for (o, &xi) in w.iter_mut().zip(row) {
                *o += coef * xi;
            }
        }
        let len = dot(&w, &w).sqrt();
        if len <= T::min_positive_value() {
            return T::zero();
        }
        lambda = len;
        let inv = T::one() / len;
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi * inv;
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_six_into_three_drops_nothing() {
        let plan = partition(6, 3, 0).unwrap();
        assert_eq!(plan.block_count(), 3);
        assert_eq!(plan.block_size(), 2);
        assert!(plan.dropped().is_empty());
        let mut all: Vec<usize> = (0..3).flat_map(|l| plan.block(l).to_vec()).collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn partition_of_seven_into_three_drops_one() {
        let plan = partition(7, 3, 1).unwrap();
        assert_eq!(plan.block_size(), 2);
        assert_eq!(plan.dropped().len(), 1);
        let mut all: Vec<usize> = (0..3).flat_map(|l| plan.block(l).to_vec()).collect();
        all.extend_from_slice(plan.dropped());
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn partition_is_deterministic_per_seed() {
        assert_eq!(partition(1000, 40, 1).unwrap(), partition(1000, 40, 1).unwrap());
        assert_ne!(
            partition(1000, 40, 1).unwrap().indices,
            partition(1000, 40, 2).unwrap().indices
        );
    }

    #[test]
    fn partition_rejects_bad_block_counts() {
        assert!(matches!(
            partition(5, 6, 0),
            Err(Error::InvalidBlockCount { l: 6, n: 5 })
        ));
        assert!(partition(5, 0, 0).is_err());
    }

    #[test]
    fn median_block_degenerate_and_odd_and_even() {
        assert_eq!(median_block(&[5.0]), (0, 5.0));
        assert_eq!(median_block(&[3.0, 1.0, 2.0]), (2, 2.0));
        // even L: lower median is rank 1 of sorted (1,2,3,4), i.e. value 2
        assert_eq!(median_block(&[4.0, 1.0, 3.0, 2.0]), (3, 2.0));
    }

    #[test]
    fn median_block_ties_resolve_to_lowest_block_index() {
        assert_eq!(median_block(&[2.0, 2.0, 2.0]), (0, 2.0));
        assert_eq!(median_block(&[7.0, 2.0, 2.0, 9.0]), (1, 2.0));
    }

    #[test]
    fn single_point_block_objective_matches_residual() {
        let x = DataMatrix::new(1, 2, vec![3.0f64, 4.0]).unwrap();
        let plan = partition(1, 1, 0).unwrap();
        let basis = gram_schmidt_orthonormalize(2, 1, &[1.0, 0.0]).unwrap();
        assert!((block_objective(&x, &plan, 0, &basis).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zero_step_keeps_the_subspace() {
        let x = DataMatrix::new(
            4,
            3,
            vec![
                1.0f64, 0.5, -0.2, -0.3, 2.0, 0.7, 0.4, -1.0, 1.5, 2.0, 0.1, -0.6,
            ],
        )
        .unwrap();
        let plan = partition(4, 2, 3).unwrap();
        let basis = gram_schmidt_orthonormalize(3, 2, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let stepped = gradient_step(&x, &plan, &basis, 0.0).unwrap();
        // eta = 0 orthonormalizes an already-orthonormal frame: identity
        for k in 0..2 {
            for i in 0..3 {
                assert!((stepped.column(k)[i] - basis.column(k)[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_validation_catches_bad_shapes() {
        let cfg: FitConfig<f64> = FitConfig::new(0, 1);
        assert!(cfg.validate(10, 3).is_err());
        let cfg: FitConfig<f64> = FitConfig::new(2, 11);
        assert!(matches!(
            cfg.validate(10, 3),
            Err(Error::InvalidBlockCount { .. })
        ));
        let cfg = FitConfig::<f64>::new(2, 2).with_eta(-1.0);
        assert!(cfg.validate(10, 3).is_err());
    }
}
