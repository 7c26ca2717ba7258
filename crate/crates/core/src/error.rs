use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported reference distribution `{0}` (only Gaussian references can be moment matched)")]
    UnsupportedReference(String),

    #[error("unsupported moment order {0}; moment tables are kept through order 4")]
    UnsupportedOrder(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("minor would remove every index")]
    EmptyMinor,

    #[error("invalid indices: {0}")]
    InvalidIndices(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("numerical failure: {message} (condition estimate {condition:.3e})")]
    NumericalFailure { message: String, condition: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("empty spectral domain: {0}")]
    EmptyDomain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("energy {0} is outside the bulk (-2, 2)")]
    InvalidEnergy(f64),

    #[error("quadrature did not converge: successive orders differ by {difference:.3e}")]
    AccuracyFailure { difference: f64 },

    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("contour passes within {distance:.3e} of an eigenvalue")]
    ContourTooClose { distance: f64 },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
