use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge (estimated error {error:e})")]
    QuadratureNonConvergence { value: f64, error: f64 },
    #[error("mesh too coarse: step {step} exceeds {limit}")]
    MeshTooCoarse { step: f64, limit: f64 },
    #[error("saddle regime is ambiguous at u+|v| = a; supply critical-real data")]
    AmbiguousRegime,
    #[error("n = {0} exceeds the double-precision budget (24); pass an explicit override")]
    PrecisionBudget(f64),
    #[error("memory estimate {needed} bytes exceeds budget {budget}")]
    MemoryBudget { needed: usize, budget: usize },
    #[error("point {0} is not in the validity region of the requested frame")]
    FrameMismatch(String),
    #[error("evaluation too close to the pole at 1 (|beta - 1| = {0:e})")]
    NearPole(f64),
    #[error("horizon unreachable: Re beta = {0} <= 1/2")]
    HorizonUnreachable(f64),
    #[error("point {0} lies outside the certified disk of radius {1}")]
    OutsideCertifiedDisk(String, f64),
    #[error("suspected zero on the contour (min/max modulus {0:e})")]
    BoundaryZero(f64),
    #[error("subdivision depth exceeded; unresolved cell carries {count} zeros")]
    MaxDepth { count: i64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("region excluded: {0}")]
    ExcludedRegion(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
