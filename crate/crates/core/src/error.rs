use thiserror::Error;

/// Everything that can go wrong while setting up or running a propagator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("coordinate {coord:?} lies outside {extent}")]
    OutOfDomain { coord: [f64; 3], extent: String },

    #[error("region {region} violates the update contract: {reason}")]
    ContractViolation { region: String, reason: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("schedule is illegal: {count} dependence violations (first: {first})")]
    IllegalSchedule { count: usize, first: String },

    #[error("numerical instability: non-finite value at step {step}")]
    Unstable { step: usize },

    #[error("cannot allocate {bytes} bytes for field storage")]
    Resource { bytes: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
