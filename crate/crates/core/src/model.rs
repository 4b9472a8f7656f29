//! Fitted model container, scoring, and JSON persistence.

use serde::{Deserialize, Serialize};

use crate::basis::{gram_schmidt_orthonormalize, Basis};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::mompca::FitConfig;
use crate::preprocess::CenterVector;
use crate::scalar::Scalar;

/// Per-fit diagnostics. A freshly fitted model carries the full traces
/// (`objective_trace.len() == iterations_run + 1`, including the initial
/// value); models loaded from disk carry only the persisted summary and have
/// empty traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport<T> {
    pub iterations_run: usize,
    pub objective_trace: Vec<T>,
    pub median_block_trace: Vec<usize>,
    pub converged: bool,
}

impl<T: Scalar> FitReport<T> {
    pub fn initial_objective(&self) -> Option<T> {
        self.objective_trace.first().copied()
    }

    pub fn final_objective(&self) -> Option<T> {
        self.objective_trace.last().copied()
    }

    pub fn best_objective(&self) -> Option<T> {
        self.objective_trace
            .iter()
            .copied()
            .fold(None, |acc: Option<T>, v| match acc {
                Some(best) if best <= v => Some(best),
                _ => Some(v),
            })
    }
}

/// A fitted median-of-means PCA model: orthonormal basis, training center,
/// resolved configuration, and the fit report.
#[derive(Debug, Clone)]
pub struct MompcaModel<T> {
    basis: Basis<T>,
    center: CenterVector<T>,
    config: FitConfig<T>,
    report: FitReport<T>,
}

impl<T: Scalar> MompcaModel<T> {
    pub(crate) fn new(
        basis: Basis<T>,
        center: CenterVector<T>,
        config: FitConfig<T>,
        report: FitReport<T>,
    ) -> Self {
        Self {
            basis,
            center,
            config,
            report,
        }
    }

    pub fn basis(&self) -> &Basis<T> {
        &self.basis
    }

    pub fn center(&self) -> &CenterVector<T> {
        &self.center
    }

    pub fn config(&self) -> &FitConfig<T> {
        &self.config
    }

    pub fn report(&self) -> &FitReport<T> {
        &self.report
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ambient_dim()
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.subspace_dim()
    }

    /// The step size the fit actually used.
    pub fn resolved_eta(&self) -> T {
        self.config.eta.expect("fit always resolves eta")
    }

    fn check_features(&self, got: usize) -> Result<()> {
        if got != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got,
                context: "new data vs model feature count",
            });
        }
        Ok(())
    }

    /// Scores: row i of the output is V^T (x_i - mu), an N x d matrix.
    pub fn transform(&self, x: &DataMatrix<T>) -> Result<DataMatrix<T>> {
        self.check_features(x.n_cols())?;
        let d = self.subspace_dim();
        let mut values = Vec::with_capacity(x.n_rows() * d);
        let mut shifted = vec![T::zero(); self.ambient_dim()];
        for row in x.rows_iter() {
            shift_into(row, self.center.as_slice(), &mut shifted);
            values.extend(self.basis.coordinates(&shifted)?);
        }
        Ok(DataMatrix::from_parts(x.n_rows(), d, values))
    }

    /// Reconstructions: V V^T (x_i - mu) + mu, an N x p matrix.
    pub fn reconstruct(&self, x: &DataMatrix<T>) -> Result<DataMatrix<T>> {
        self.check_features(x.n_cols())?;
        let p = self.ambient_dim();
        let mu = self.center.as_slice();
        let mut values = Vec::with_capacity(x.n_rows() * p);
        let mut shifted = vec![T::zero(); p];
        let mut expanded = vec![T::zero(); p];
        for row in x.rows_iter() {
            shift_into(row, mu, &mut shifted);
            let coords = self.basis.coordinates(&shifted)?;
            self.basis.expand_into(&coords, &mut expanded);
            values.extend(expanded.iter().zip(mu).map(|(&r, &m)| r + m));
        }
        Ok(DataMatrix::from_parts(x.n_rows(), p, values))
    }

    /// Squared residual of a single observation against the fitted subspace,
    /// measured from the training center.
    pub fn residual_of(&self, row: &[T]) -> Result<T> {
        self.check_features(row.len())?;
        let mut shifted = vec![T::zero(); self.ambient_dim()];
        shift_into(row, self.center.as_slice(), &mut shifted);
        Ok(self.basis.residual_unchecked(&shifted))
    }

    pub fn to_document(&self) -> ModelDocument<T> {
        ModelDocument {
            p: self.ambient_dim(),
            d: self.subspace_dim(),
            l: self.config.block_count,
            seed: self.config.seed,
            eta: self.resolved_eta(),
            center: self.center.0.clone(),
            basis: self.basis.columns_flat().to_vec(),
            report: ReportSummary {
                iterations_run: self.report.iterations_run,
                converged: self.report.converged,
                initial_objective: self.report.initial_objective(),
                final_objective: self.report.final_objective(),
                best_objective: self.report.best_objective(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument<T> = serde_json::from_str(text)?;
        doc.into_model()
    }
}

#[inline]
fn shift_into<T: Scalar>(row: &[T], mu: &[T], out: &mut [T]) {
    for ((o, &v), &m) in out.iter_mut().zip(row).zip(mu) {
        *o = v - m;
    }
}

/// Summary block stored inside a persisted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary<T> {
    pub iterations_run: usize,
    pub converged: bool,
    pub initial_objective: Option<T>,
    pub final_objective: Option<T>,
    pub best_objective: Option<T>,
}

/// On-disk model schema: one JSON document with the basis stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument<T> {
    pub p: usize,
    pub d: usize,
    pub l: usize,
    pub seed: u64,
    pub eta: T,
    pub center: Vec<T>,
    /// Column-major p x d orthonormal basis.
    pub basis: Vec<T>,
    pub report: ReportSummary<T>,
}

impl<T: Scalar> ModelDocument<T> {
    pub fn into_model(self) -> Result<MompcaModel<T>> {
        if self.center.len() != self.p {
            return Err(Error::InvalidInput(format!(
                "center has {} entries, expected p={}",
                self.center.len(),
                self.p
            )));
        }
        if self.basis.len() != self.p * self.d {
            return Err(Error::InvalidInput(format!(
                "basis has {} entries, expected p*d={}",
                self.basis.len(),
                self.p * self.d
            )));
        }
        if self.basis.iter().chain(self.center.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in model".into()));
        }
        // re-orthonormalize rather than trust the file; reject if the stored
        // columns are not already a basis to working tolerance
        let basis = gram_schmidt_orthonormalize(self.p, self.d, &self.basis)?;
        let drift: T = basis
            .columns_flat()
            .iter()
            .zip(&self.basis)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        if drift > T::from_f64_lossy(1e-6) {
            return Err(Error::InvalidInput(
                "stored basis columns are not orthonormal".into(),
            ));
        }
        let mut config = FitConfig::new(self.d, self.l).with_seed(self.seed);
        config.eta = Some(self.eta);
        let report = FitReport {
            iterations_run: self.report.iterations_run,
            objective_trace: Vec::new(),
            median_block_trace: Vec::new(),
            converged: self.report.converged,
        };
        Ok(MompcaModel::new(
            basis,
            CenterVector(self.center),
            config,
            report,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::mompca::fit;

    fn small_model() -> MompcaModel<f64> {
        let x = datagen::gaussian_inliers(60, 4, &[8.0, 4.0, 1.0, 0.5], 7).unwrap();
        fit(&x, &FitConfig::new(2, 5).with_seed(3)).unwrap()
    }

    #[test]
    fn transform_of_the_center_is_zero() {
        let model = small_model();
        let mu = model.center().0.clone();
        let x = DataMatrix::new(1, 4, mu.clone()).unwrap();
        let scores = model.transform(&x).unwrap();
        for k in 0..model.subspace_dim() {
            assert!(scores.get(0, k).abs() < 1e-12);
        }
        let recon = model.reconstruct(&x).unwrap();
        for j in 0..4 {
            assert!((recon.get(0, j) - mu[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn in_span_points_reconstruct_exactly() {
        let model = small_model();
        let p = model.ambient_dim();
        // x = mu + 2 * v_0 lies in the model's affine span
        let mut row = model.center().0.clone();
        for (r, &v) in row.iter_mut().zip(model.basis().column(0)) {
            *r += 2.0 * v;
        }
        let x = DataMatrix::new(1, p, row.clone()).unwrap();
        let recon = model.reconstruct(&x).unwrap();
        for j in 0..p {
            assert!((recon.get(0, j) - row[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_error_equals_residual() {
        let model = small_model();
        let x = datagen::gaussian_inliers(10, 4, &[1.0, 1.0, 1.0, 1.0], 99).unwrap();
        let recon = model.reconstruct(&x).unwrap();
        for i in 0..x.n_rows() {
            let err: f64 = x
                .row(i)
                .iter()
                .zip(recon.row(i))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            let resid = model.residual_of(x.row(i)).unwrap();
            assert!(
                (err - resid).abs() <= 1e-8 * err.max(1.0),
                "row {i}: {err} vs {resid}"
            );
        }
    }

    #[test]
    fn json_round_trip_reproduces_transforms() {
        let model = small_model();
        let restored = MompcaModel::<f64>::from_json(&model.to_json()).unwrap();
        let x = datagen::gaussian_inliers(20, 4, &[2.0, 2.0, 2.0, 2.0], 5).unwrap();
        let a = model.transform(&x).unwrap();
        let b = restored.transform(&x).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn corrupt_documents_are_rejected() {
        let model = small_model();
        let mut doc = model.to_document();
        doc.basis[0] += 0.5;
        assert!(doc.into_model().is_err());

        let mut doc = model.to_document();
        doc.center.pop();
        assert!(doc.into_model().is_err());
    }
}
