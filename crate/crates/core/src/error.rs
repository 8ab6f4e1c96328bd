use thiserror::Error;

/// Errors raised by the decomposition, test, and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied parameter is outside its valid range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Not enough samples for a stage of the pipeline.
    #[error("insufficient data for {stage}: need at least {required} samples, got {available}")]
    InsufficientData {
        stage: &'static str,
        required: usize,
        available: usize,
    },

    /// Every sample in the window or batch is missing.
    #[error("all values are missing in {0}")]
    AllMissing(&'static str),

    #[error("median of an empty window")]
    EmptyWindow,

    /// Two component series do not share the expected index domain.
    #[error("misaligned components: {0}")]
    Misaligned(String),

    /// Malformed structured input (calendar, labels, series, reports).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
