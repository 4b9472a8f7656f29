//! Robust PCA via median-of-means.
//!
//! Classical PCA minimizes the mean squared projection residual and is
//! famously wrecked by a single large outlier. This crate fits the same
//! rank-d projector by minimizing the *median over blocks of block-mean
//! residuals* instead: the sample is split into L equal blocks, and each
//! gradient step is driven only by the block whose mean residual is the
//! median. As long as fewer than half of the blocks contain corrupted points,
//! the fit never looks at them.
//!
//! On top of the fitter the crate provides residual-based anomaly scoring,
//! video background modeling over pixel trajectories, seeded synthetic
//! benchmarks, and numerical evaluation of the estimator's concentration
//! bounds.
//!
//! All numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the default `f64` working types.

pub mod anomaly;
pub mod background;
mod basis;
pub mod csvio;
pub mod datagen;
mod eigen;
mod error;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod mompca;
pub mod preprocess;
pub mod rng;
mod scalar;

pub use basis::{gram_schmidt_orthonormalize, Basis};
pub use eigen::{eigenvalues_symmetric, top_eigenvectors};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default-precision working types.
pub type Matrix = matrix::DataMatrix<f64>;
pub type Symmetric = matrix::SymmetricMatrix<f64>;
pub type BasisF64 = Basis<f64>;
pub type Config = mompca::FitConfig<f64>;
pub type Model = model::MompcaModel<f64>;
pub type Center = preprocess::CenterVector<f64>;
