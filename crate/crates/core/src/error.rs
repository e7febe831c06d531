use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),
    #[error("expected count for label `{0}` is zero; statistic undefined")]
    ZeroExpectedCell(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("no common support between distributions")]
    NoCommonSupport,
    #[error("missing feature `{0}`")]
    MissingFeature(String),
    #[error("feature `{feature}` has the wrong type for this predicate (expected {expected})")]
    TypeMismatch { feature: String, expected: &'static str },
    #[error("design matrix is rank deficient (rank {rank} < {columns})")]
    RankDeficient { rank: usize, columns: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid loss matrix: {0}")]
    InvalidLossMatrix(String),
    #[error("missing standard error for component `{0}`")]
    MissingStdError(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
