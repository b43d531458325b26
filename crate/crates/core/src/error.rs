use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("spectrum is not conjugate symmetric (imaginary residual {residual:e} exceeds {tolerance:e})")]
    Asymmetric { residual: f64, tolerance: f64 },
    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),
    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
