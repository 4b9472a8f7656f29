use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("rank deficient input: column {column} collapsed during orthonormalization")]
    RankDeficient { column: usize },

    #[error("{what} failed to converge within {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    #[error("invalid block count L={l} for N={n} observations (need 1 <= L <= N)")]
    InvalidBlockCount { l: usize, n: usize },

    #[error("invalid target rank r={r} for an {n} x {p} matrix (need r < min(n, p))")]
    InvalidRank { r: usize, n: usize, p: usize },

    #[error("invalid outlier fraction {value}: must lie strictly inside (0, 1)")]
    InvalidFraction { value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inlier row set is empty")]
    EmptyInlierSet,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("frame shape mismatch: frame {frame} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    ShapeMismatch {
        frame: usize,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("model document error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad inputs or configuration rather than by
    /// numerical breakdown or the environment. CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidBlockCount { .. }
                | Error::InvalidRank { .. }
                | Error::InvalidFraction { .. }
                | Error::InvalidInput(_)
                | Error::EmptyInlierSet
                | Error::LengthMismatch { .. }
                | Error::AssumptionViolated(_)
                | Error::Parse { .. }
                | Error::ShapeMismatch { .. }
        )
    }

    /// True for numerical failures (exit code 3).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::ConvergenceFailure { .. }
        )
    }
}
