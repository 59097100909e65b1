use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graphing::Violation;

/// Errors raised by graphing operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point, set, or parameter is outside the domain of the operation.
    Domain(String),
    /// A graphing or set failed validation.
    Validation(Vec<Violation>),
    /// A ball grew past the configured node cap.
    NodeCap { cap: usize },
    /// Two balls of different radii were compared.
    RadiusMismatch { left: u32, right: u32 },
    /// No coherent subsequence could be selected for a limit tower.
    Tower(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Validation(v) => {
                write!(f, "validation failed")?;
                for item in v {
                    write!(f, "; {item}")?;
                }
                Ok(())
            }
            Error::NodeCap { cap } => write!(f, "ball exceeded node cap of {cap}"),
            Error::RadiusMismatch { left, right } => {
                write!(f, "radius mismatch: {left} vs {right}")
            }
            Error::Tower(msg) => write!(f, "tower construction failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
