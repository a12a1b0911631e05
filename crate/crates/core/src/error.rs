use alloc::string::String;

/// Errors raised by model construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The linear system has a drift eigenvalue with non-negative real part.
    #[error("system is unstable (stability margin {margin:.6e} rad/s)")]
    Unstable { margin: f64 },
    /// A numerical routine failed (singular system, no convergence, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! numerical {
    ($($arg:tt)*) => {
        $crate::error::Error::Numerical(alloc::format!($($arg)*))
    };
}

pub(crate) use domain;
pub(crate) use numerical;
