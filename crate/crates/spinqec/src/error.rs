use thiserror::Error;

use crate::HalfInt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("spin mismatch: {left} vs {right}")]
    SpinMismatch { left: HalfInt, right: HalfInt },
    #[error("magnetic quantum number out of range: {0}")]
    OutOfRange(String),
    #[error("invalid code specification: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation requires a different code family: {0}")]
    WrongFamily(String),
    #[error("stereographic coordinate is infinite at the south pole")]
    SouthPole,
}

pub type Result<T> = std::result::Result<T, Error>;
