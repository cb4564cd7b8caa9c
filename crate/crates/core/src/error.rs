use crate::geometry::Manifold;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("points live on different manifolds ({0} and {1})")]
    ManifoldMismatch(Manifold, Manifold),

    #[error("invalid point on {manifold}: {reason}")]
    InvalidPoint { manifold: Manifold, reason: String },

    #[error("{operation} is not supported on {manifold}")]
    Unsupported { manifold: Manifold, operation: &'static str },

    #[error("point lies in the cut locus (distance {distance}, injectivity radius {radius})")]
    CutLocus { distance: f64, radius: f64 },

    #[error("projection onto the embedded manifold is not unique (eigenvalue gap {gap:e})")]
    NonUniqueProjection { gap: f64 },

    #[error("covariance matrix is singular (min/max eigenvalue ratio {ratio:e})")]
    SingularCovariance { ratio: f64 },

    #[error("iteration did not converge after {iterations} steps (gradient norm {gradient_norm:e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("rank deficient configuration (relative singular value {relative:e})")]
    RankDeficient { relative: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_point(manifold: Manifold, reason: impl Into<String>) -> Self {
        Error::InvalidPoint { manifold, reason: reason.into() }
    }
}
