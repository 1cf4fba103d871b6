use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sampled force function needs at least 3 grid points, got {0}")]
    GridTooCoarse(usize),

    #[error("sampled grid is not strictly increasing at index {0}")]
    NonMonotoneGrid(usize),

    #[error("unknown catalog id `{0}`")]
    UnknownCatalog(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no fixed points for lambda = {0} (requires lambda <= 1)")]
    NoFixedPoints(f64),

    #[error("negative driving strength {0}; reduce it with symmetry_reduce first")]
    NegativeLambda(f64),

    #[error("integration failed at x = {x}: {reason}")]
    IntegrationFailure { x: f64, reason: String },

    #[error("force function is not well-shaped: {0}")]
    NotWellShaped(String),

    #[error("eigenfunction has {found} nodes but level index is {expected}")]
    NodeMismatch { expected: usize, found: usize },

    #[error("non-removable singularity in constructed force function at alpha = {alpha}")]
    SingularConstruction { alpha: f64 },

    #[error("invalid critical curve: {0}")]
    InvalidCurve(String),

    #[error("zero driving strength: the transformation divides by sqrt(2 lambda)")]
    ZeroLambda,

    #[error("|U1| and |U2| differ by {0:e}; not on the bound-state branch")]
    OffBoundBranch(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
