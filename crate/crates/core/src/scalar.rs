//! Floating-point scalar abstraction: every numeric kernel in this crate is
//! generic over [`Scalar`], implemented for `f32` and `f64`.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the toolkit operates on.
///
/// Tolerances that depend on the working precision live here so generic code
/// does not hard-wire f64 magnitudes.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Frobenius tolerance for "this basis has orthonormal columns".
    const ORTHO_TOL: Self;

    /// Relative threshold below which a Gram-Schmidt residual column is
    /// treated as linearly dependent.
    const RANK_TOL: Self;

    /// Eigenpair residual target, relative to the Frobenius norm of the
    /// matrix being decomposed.
    const EIG_TOL: Self;

    /// Lossless-enough conversion from f64 literals (tolerances, generator
    /// output). Panics only if the target type cannot represent any finite
    /// value of the input, which cannot happen for f32/f64.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any supported scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("supported scalars convert to f64")
    }
}

impl Scalar for f64 {
    const ORTHO_TOL: f64 = 1e-10;
    const RANK_TOL: f64 = 1e-12;
    const EIG_TOL: f64 = 1e-10;
}

impl Scalar for f32 {
    const ORTHO_TOL: f32 = 1e-4;
    const RANK_TOL: f32 = 1e-6;
    const EIG_TOL: f32 = 1e-5;
}
