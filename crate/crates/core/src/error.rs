use thiserror::Error;

use crate::conic::{SolveReport, SolveStatus};

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("moment of degree {needed} requested but the sequence only reaches degree {available}")]
    DegreeOverflow { needed: usize, available: usize },

    #[error("power p = {0} must be even for this operation")]
    OddPower(u32),

    #[error("power p = {0} must be odd for this operation")]
    EvenPower(u32),

    #[error("relaxation order {order} is below the minimum admissible order r* = {minimum}")]
    OrderTooLow { order: usize, minimum: usize },

    #[error("measure has empty support")]
    EmptySupport,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("problem has a quadratic objective; use the fixed-point driver")]
    QuadraticObjective,

    #[error("solver stopped with status {status:?}")]
    Solver { status: SolveStatus, report: Box<SolveReport> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
