use alloc::string::String;

/// Errors reported by the solver library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid decimal literal `{0}`")]
    InvalidDecimal(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value outside the envelope domain [0, omega]")]
    OutOfDomain,
    #[error("integer overflow while scaling {0}")]
    Overflow(&'static str),
    #[error("solver invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;
