use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Values and grid disagree, or two fields live on different grids.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("operation `{op}` is not supported on {domain} grids")]
    UnsupportedDomain { op: &'static str, domain: &'static str },

    #[error("precondition failed in `{op}`: field mean {mean:e} exceeds tolerance {tol:e}")]
    NonzeroMean { op: &'static str, mean: f64, tol: f64 },

    #[error("interface estimate is empty; multiplicity is undefined")]
    EmptyInterface,

    #[error("solver diverged at step {step} (mode/node {mode}): non-finite value")]
    Divergence { step: usize, mode: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid sphere family: {0}")]
    InvalidFamily(String),

    #[error("incompatible surface velocity: total flux {flux:e} (must vanish)")]
    IncompatibleVelocity { flux: f64 },

    #[error("inadmissible correction field: denominator {denominator:e} below 1e-8")]
    InadmissibleBump { denominator: f64 },

    #[error("probe step fell below 1e-8 while enforcing injectivity of the deformation")]
    DeformationNotInjective,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
