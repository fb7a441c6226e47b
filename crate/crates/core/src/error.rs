use thiserror::Error;

/// Errors raised by the codec.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// `r` or `m` outside the supported range.
    #[error("invalid code parameters r={r}, m={m} (need 0 <= r <= m, 1 <= m <= 16)")]
    InvalidParams { r: u32, m: u32 },

    /// A vector or matrix did not have the expected length.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The received columns of the generator matrix do not span the message space.
    #[error("generator submatrix is rank deficient: rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },

    /// Payloads within one block have different sizes.
    #[error("payload {index} has {actual} bytes, expected {expected}")]
    RaggedPayloads {
        index: usize,
        expected: usize,
        actual: usize,
    },

    /// A block's erasure pattern differs from the one its schedule was recorded for.
    #[error("block erasure pattern does not match the schedule")]
    PatternMismatch,

    /// A frame, trailer or serialized schedule could not be parsed.
    #[error("malformed packet: {0}")]
    Malformed(String),

    /// Unknown algorithm or policy name.
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    /// A simulation configuration violated its preconditions.
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
