use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("value {v} is below the curve minimum {min} for type {t}")]
    Domain { v: f64, t: f64, min: f64 },

    #[error("cdf is not monotone near x = {x}")]
    NonMonotoneCdf { x: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Empirics(#[from] crate::empirics::EmpiricsError),
}

pub type Result<T> = std::result::Result<T, Error>;
