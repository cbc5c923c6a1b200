use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix determinant is {0}, expected +-1")]
    NotUnimodular(i128),
    #[error("not hyperbolic: an eigenvalue modulus lies within {margin:e} of 1")]
    NotHyperbolic { margin: f64 },
    #[error("stable dimension is {stable_dim}, expected 1")]
    NotCodimensionOne { stable_dim: usize },
    #[error("det(M^{period} - I) = 0")]
    NonHyperbolicPeriod { period: u32 },
    #[error("roof is not certified positive (margin {margin:e})")]
    NonPositiveRoof { margin: f64 },
    #[error("periodic obstruction spread {spread:e} exceeds tolerance {tolerance:e}")]
    ObstructionNonzero { spread: f64, tolerance: f64 },
    #[error("truncation insufficient: residual {residual:e} did not decrease when the frequency bound was doubled")]
    TruncationInsufficient { residual: f64 },
    #[error("displacement is off the requested leaf (transverse component {transverse:e})")]
    OffLeaf { transverse: f64 },
    #[error("displacement {norm} exceeds chart radius {radius}")]
    OutsideChart { norm: f64, radius: f64 },
    #[error("leaf intersection not found inside the chart")]
    NoIntersection,
    #[error("gradients have rank {rank}, need {needed}")]
    DegenerateGradients { rank: usize, needed: usize },
    #[error("bunching ratio {ratio} >= 1: the series derivative does not converge")]
    NotBunched { ratio: f64 },
    #[error("orbit left the chart validity region before the return series converged")]
    ChartExit,
    #[error("all residuals are below the noise floor {floor:e}")]
    ResidualBelowNoise { floor: f64 },
    #[error("bump violates condition: {0}")]
    InvalidBump(String),
    #[error("series did not converge after {terms} terms")]
    NoConvergence { terms: usize },
}

impl Error {
    pub(crate) fn invalid(msg: &str) -> Self {
        Error::InvalidInput(String::from(msg))
    }
}
