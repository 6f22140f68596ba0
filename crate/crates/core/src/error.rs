use thiserror::Error;

/// Errors raised by distribution handling, bound evaluation and protocol simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must be nonempty")]
    EmptyAlphabet,

    #[error("duplicate symbol `{0}` in alphabet")]
    DuplicateSymbol(String),

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("pmf length {got} does not match product of alphabet sizes {expected}")]
    PmfLength { expected: usize, got: usize },

    #[error("negative probability {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("pmf sums to {0}, expected 1 within 1e-9")]
    NotNormalized(f64),

    #[error("subnormalized mass sums to {0} > 1")]
    MassExceedsOne(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("conditioning marginal is identically zero")]
    ZeroConditioning,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("state space of {size} entries exceeds cap {cap}")]
    CapExceeded { size: u128, cap: usize },

    #[error("parameter violation: {0}")]
    Parameter(String),

    #[error("all-zero mass function")]
    ZeroMass,

    #[error("Q does not factorize across the partition (max deviation {0:e})")]
    NotFactorized(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("protocol schedule violation: {0}")]
    Schedule(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("interface mismatch: {0}")]
    Interface(String),

    #[error("eve variable present; formula requires constant side information")]
    EvePresent,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
