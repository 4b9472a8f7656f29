//! Seeded synthetic data: the low-rank-plus-outliers benchmark generator and
//! clean Gaussian fixtures. Every generator is a pure function of its
//! arguments, the seed included; see [`crate::rng`] for the stream layout.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::{stream, CounterRng};
use crate::scalar::Scalar;

/// A corrupted sample with its clean ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticDataset<T> {
    /// Corrupted data handed to fitters.
    pub data: DataMatrix<T>,
    /// Clean low-rank ground truth.
    pub clean: DataMatrix<T>,
    /// Rows that received outlier noise, ascending.
    pub outlier_rows: Vec<usize>,
    pub true_rank: usize,
    pub seed: u64,
}

impl<T: Scalar> SyntheticDataset<T> {
    /// Complement of `outlier_rows`, ascending.
    pub fn inlier_rows(&self) -> Vec<usize> {
        let mut flag = vec![true; self.data.n_rows()];
        for &r in &self.outlier_rows {
            flag[r] = false;
        }
        flag.iter()
            .enumerate()
            .filter_map(|(i, &keep)| keep.then_some(i))
            .collect()
    }
}

/// Rank-r product of two standard-normal factors (n x r times r x p), with
/// uniform noise on `(-500, 500)` added entrywise to floor(sqrt(n)) randomly
/// selected rows.
pub fn lowrank_with_outliers<T: Scalar>(
    n: usize,
    p: usize,
    r: usize,
    seed: u64,
) -> Result<SyntheticDataset<T>> {
    lowrank(n, p, r, seed, true)
}

/// Same construction with no corrupted rows (clean-equivalence baseline).
pub fn lowrank_clean<T: Scalar>(n: usize, p: usize, r: usize, seed: u64) -> Result<SyntheticDataset<T>> {
    lowrank(n, p, r, seed, false)
}

fn lowrank<T: Scalar>(
    n: usize,
    p: usize,
    r: usize,
    seed: u64,
    inject_outliers: bool,
) -> Result<SyntheticDataset<T>> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("need n >= 1 and p >= 1".into()));
    }
    if r == 0 || r >= n.min(p) {
        return Err(Error::InvalidRank { r, n, p });
    }

    let mut left_rng = CounterRng::new(seed, stream::LOWRANK_LEFT);
    let left: Vec<f64> = (0..n * r).map(|_| left_rng.next_gaussian()).collect();
    let mut right_rng = CounterRng::new(seed, stream::LOWRANK_RIGHT);
    let right: Vec<f64> = (0..r * p).map(|_| right_rng.next_gaussian()).collect();

    let mut values = vec![T::zero(); n * p];
    for i in 0..n {
        for k in 0..r {
            let a = left[i * r + k];
            for j in 0..p {
                values[i * p + j] += T::from_f64_lossy(a * right[k * p + j]);
            }
        }
    }
    let clean = DataMatrix::from_parts(n, p, values.clone());

    let mut outlier_rows = Vec::new();
    if inject_outliers {
        let count = (n as f64).sqrt().floor() as usize;
        let mut perm: Vec<usize> = (0..n).collect();
        CounterRng::new(seed, stream::OUTLIER_ROWS).shuffle(&mut perm);
        outlier_rows = perm[..count].to_vec();
        outlier_rows.sort_unstable();
        let mut noise = CounterRng::new(seed, stream::OUTLIER_NOISE);
        for &row in &outlier_rows {
            for j in 0..p {
                values[row * p + j] += T::from_f64_lossy(noise.next_range(-500.0, 500.0));
            }
        }
    }

    Ok(SyntheticDataset {
        data: DataMatrix::from_parts(n, p, values),
        clean,
        outlier_rows,
        true_rank: r,
        seed,
    })
}

/// Rows drawn i.i.d. from N(0, diag(variances)).
pub fn gaussian_inliers<T: Scalar>(
    n: usize,
    p: usize,
    variances: &[f64],
    seed: u64,
) -> Result<DataMatrix<T>> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("need n >= 1 and p >= 1".into()));
    }
    if variances.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: variances.len(),
            context: "variance vector vs feature count",
        });
    }
    if variances.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "variances must be positive and finite".into(),
        ));
    }
    let scales: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let mut rng = CounterRng::new(seed, stream::GAUSSIAN);
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        for &s in &scales {
            values.push(T::from_f64_lossy(s * rng.next_gaussian()));
        }
    }
    Ok(DataMatrix::from_parts(n, p, values))
}
