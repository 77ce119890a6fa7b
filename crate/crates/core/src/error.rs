use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("negative weight {weight} at atom {index}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("all weights are zero")]
    ZeroTotalMass,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("measure invariant violated: {0}")]
    InvariantViolated(String),

    #[error("localization ball carries zero mass")]
    EmptyLocalization,

    #[error("approximant set is empty at resolution {resolution}")]
    EmptyApproximant { resolution: usize },

    #[error("resolution {resolution} too coarse, need at least {required}")]
    ResolutionTooCoarse { resolution: usize, required: usize },

    #[error("box radius {requested} exceeds alias guard {limit}")]
    AliasGuard { requested: usize, limit: usize },

    #[error("frequency {xi:?} lies outside the table (box radius {box_radius})")]
    FrequencyOutsideBox { xi: Vec<i64>, box_radius: usize },

    #[error("frequency {xi:?} is not tabulated")]
    FrequencyNotTabulated { xi: Vec<i64> },

    #[error("fewer than 3 usable shells ({found})")]
    TooFewShells { found: usize },

    #[error("truncation not converged: remainder {remainder:e} exceeds {tolerance:e}")]
    TruncationNotConverged { remainder: f64, tolerance: f64 },

    #[error("profile decays like |xi|^-{order}, too slowly for exponent {required}")]
    ProfileTooRough { order: f64, required: f64 },

    #[error("infeasible parameter choice: {0}")]
    Infeasible(String),

    #[error("serialization: {0}")]
    Serde(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
