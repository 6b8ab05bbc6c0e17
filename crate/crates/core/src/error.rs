use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a documented constraint.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// The overlap-add envelope vanishes at some phase, so the signal cannot be
    /// reconstructed there.
    #[error("degenerate window pair: overlap-add envelope is {value:e} at phase {phase}")]
    DegenerateWindow { phase: usize, value: f64 },

    /// Channel counts, lengths or bin counts do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("frame out of sequence on channel {channel}: expected index {expected}, got {got}")]
    Sequencing { channel: usize, expected: u64, got: u64 },

    /// Operation not allowed in the current stream state (e.g. after flush).
    #[error("invalid stream state: {0}")]
    State(String),

    #[error("SNR undefined: reference signal has zero energy")]
    UndefinedSnr,
}

impl Error {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
