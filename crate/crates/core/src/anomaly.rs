//! Residual-based outlier detection on top of a fitted model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::model::MompcaModel;
use crate::scalar::Scalar;

/// Scores, threshold, and binary labels for one scored batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyResult<T> {
    pub scores: Vec<T>,
    /// The k-th largest score, k = ceil(fraction * N).
    pub threshold: T,
    pub labels: Vec<bool>,
    pub fraction: f64,
}

/// Squared residual of every row against the fitted subspace, measured from
/// the training center.
pub fn anomaly_scores<T: Scalar>(model: &MompcaModel<T>, x: &DataMatrix<T>) -> Result<Vec<T>> {
    if x.n_cols() != model.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.ambient_dim(),
            got: x.n_cols(),
            context: "scored data vs model feature count",
        });
    }
    (0..x.n_rows())
        .into_par_iter()
        .map(|i| model.residual_of(x.row(i)))
        .collect()
}

/// Labels exactly `ceil(fraction * N)` points as outliers: the largest scores,
/// with ties at the threshold resolved by labeling higher original indices
/// first. Raising the fraction never unlabels a labeled point.
pub fn label_top_fraction<T: Scalar>(scores: &[T], fraction: f64) -> Result<AnomalyResult<T>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidFraction { value: fraction });
    }
    let n = scores.len();
    if n == 0 {
        return Err(Error::InvalidInput("no scores to label".into()));
    }
    let k = (fraction * n as f64).ceil() as usize;
    let k = k.max(1).min(n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(b.cmp(&a))
    });

    let mut labels = vec![false; n];
    for &i in order.iter().take(k) {
        labels[i] = true;
    }
    let threshold = scores[order[k - 1]];
    Ok(AnomalyResult {
        scores: scores.to_vec(),
        threshold,
        labels,
        fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::mompca::{fit, FitConfig};

    #[test]
    fn top_fraction_labels_the_largest_scores() {
        let scores: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let res = label_top_fraction(&scores, 0.2).unwrap();
        let labeled: Vec<usize> = res
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| l.then_some(i))
            .collect();
        assert_eq!(labeled, vec![8, 9]);
        assert_eq!(res.threshold, 8.0);
    }

    #[test]
    fn equal_scores_label_highest_indices_first() {
        let scores = vec![1.0f64; 10];
        let res = label_top_fraction(&scores, 0.2).unwrap();
        let labeled: Vec<usize> = res
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| l.then_some(i))
            .collect();
        assert_eq!(labeled, vec![8, 9]);
    }

    #[test]
    fn label_count_is_exactly_ceil() {
        for n in [3usize, 7, 10, 11, 100] {
            for o in [0.05, 0.2, 0.33, 0.5, 0.9] {
                let scores: Vec<f64> = (0..n).map(|v| (v * 31 % 17) as f64).collect();
                let res = label_top_fraction(&scores, o).unwrap();
                let count = res.labels.iter().filter(|&&l| l).count();
                assert_eq!(count, ((o * n as f64).ceil() as usize).min(n), "n={n} o={o}");
            }
        }
    }

    #[test]
    fn growing_fraction_never_unlabels() {
        let scores: Vec<f64> = (0..40).map(|v| ((v * 13) % 19) as f64).collect();
        let mut prev = vec![false; scores.len()];
        for o in [0.05, 0.1, 0.3, 0.55, 0.8, 0.95] {
            let res = label_top_fraction(&scores, o).unwrap();
            for (i, (&was, &now)) in prev.iter().zip(&res.labels).enumerate() {
                assert!(!was || now, "point {i} unlabeled at o={o}");
            }
            prev = res.labels;
        }
    }

    #[test]
    fn fraction_bounds_are_enforced() {
        assert!(matches!(
            label_top_fraction(&[1.0f64], 0.0),
            Err(Error::InvalidFraction { .. })
        ));
        assert!(label_top_fraction(&[1.0f64], 1.0).is_err());
    }

    #[test]
    fn scores_vanish_at_the_center_and_in_span() {
        let x: DataMatrix<f64> = datagen::gaussian_inliers(80, 3, &[6.0, 3.0, 0.5], 2).unwrap();
        let model = fit(&x, &FitConfig::new(2, 8).with_seed(1)).unwrap();

        let mu = model.center().0.clone();
        let mut in_span = mu.clone();
        for (v, &b) in in_span.iter_mut().zip(model.basis().column(1)) {
            *v += 3.5 * b;
        }
        let probe = DataMatrix::from_rows(&[mu, in_span]).unwrap();
        let scores = anomaly_scores(&model, &probe).unwrap();
        assert!(scores[0].abs() < 1e-12);
        assert!(scores[1].abs() < 1e-9);
    }
}
