use alloc::string::String;

/// Errors raised by the core toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown transform `{0}`")]
    UnknownTransform(String),
    #[error("severity {severity} out of range {min}..={max} for `{name}`")]
    SeverityOutOfRange {
        name: String,
        severity: u8,
        min: u8,
        max: u8,
    },
    #[error("`{name}` requires a severity")]
    MissingSeverity { name: String },
    #[error("`{name}` does not take a severity")]
    UnexpectedSeverity { name: String },
    #[error("parameter `{param}` of `{name}`: {reason}")]
    InvalidParam {
        name: String,
        param: String,
        reason: String,
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("{0}")]
    Domain(String),
    #[error("requested {requested} items but only {available} available")]
    Size { requested: usize, available: usize },
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("extractor fingerprint mismatch: {left:016x} vs {right:016x}")]
    FingerprintMismatch { left: u64, right: u64 },
    #[error("no feature for id `{0}`")]
    MissingFeature(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("coverage: {0}")]
    Coverage(String),
    #[error(
        "infeasible: {reason} (nearest achievable average error {nearest:.3}, target {target:.3})"
    )]
    Infeasible {
        reason: String,
        nearest: f64,
        target: f64,
    },
    #[error("no candidate dataset is composed of exactly the selected corruptions")]
    Composition,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
