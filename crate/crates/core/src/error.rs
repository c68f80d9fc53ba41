use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A direction sequence ran out before every rounding was assigned one.
    #[error("direction sequence exhausted after {used} roundings")]
    DirectionsExhausted { used: usize },

    #[error("precision mismatch: {left} vs {right}")]
    PrecisionMismatch { left: u32, right: u32 },

    #[error("unsupported precision {0} (supported: 2..=62)")]
    UnsupportedPrecision(u32),

    #[error("value is not representable at precision {precision}: {value}")]
    NotRepresentable { precision: u32, value: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),
}
