use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: argument {value} outside the domain ({expected})")]
    Domain {
        op: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{op}: pole at z = {re} + {im}i")]
    Pole { op: &'static str, re: f64, im: f64 },

    #[error("{op}: no convergence after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{qubits} qubits exceeds the exact-simulation cap of {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("{op}: singular at the requested point ({detail})")]
    Singular { op: &'static str, detail: String },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{op}: non-finite objective value at x = {at:?}")]
    NonFinite { op: &'static str, at: Vec<f64> },

    #[error("no outcome yields a defined estimate")]
    NoDefinedOutcomes,

    #[error("enumeration over nu = {nu} repetitions exceeds the cap of {max}")]
    EnumerationTooLarge { nu: u64, max: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
