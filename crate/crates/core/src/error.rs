use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular value decomposition did not converge")]
    ConvergenceFailure,

    #[error("degenerate lasso path: {0}")]
    DegeneratePath(String),

    #[error("fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("invalid fold count k={k} for n={n}")]
    InvalidFoldCount { n: usize, k: usize },

    #[error("fold {fold} leaves only {train} training observations")]
    FoldTooSmall { fold: usize, train: usize },

    #[error("reference l1 norm must be positive, got {0}")]
    NonpositiveNorm(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("subsample of {needed} observations exceeds pool of {pool}")]
    SubsampleExhausted { needed: usize, pool: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    ValidationError { field: String, message: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, machine-parsable name of the error variant.
    pub fn class(&self) -> &'static str {
        match self {
            Error::ZeroVarianceColumn(_) => "ZeroVarianceColumn",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::DegeneratePath(_) => "DegeneratePath",
            Error::FractionOutOfRange(_) => "FractionOutOfRange",
            Error::InvalidFoldCount { .. } => "InvalidFoldCount",
            Error::FoldTooSmall { .. } => "FoldTooSmall",
            Error::NonpositiveNorm(_) => "NonpositiveNorm",
            Error::EmptyInput(_) => "EmptyInput",
            Error::SubsampleExhausted { .. } => "SubsampleExhausted",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::ParseError { .. } => "ParseError",
            Error::ValidationError { .. } => "ValidationError",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "IoError",
        }
    }

    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::ValidationError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
