use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every variant carries the name of the operation that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: DimensionMismatch (expected {expected}, got {got})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{op}: index {index} out of range for length {len}")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        len: usize,
    },
    #[error("{op}: invalid input: {reason}")]
    InvalidInput { op: &'static str, reason: String },
    #[error("{op}: LatticeMismatch: {reason}")]
    LatticeMismatch { op: &'static str, reason: String },
    #[error("{op}: EmptyFamily")]
    EmptyFamily { op: &'static str },
    #[error("{op}: unknown built-in {name:?}")]
    UnknownBuiltin { op: &'static str, name: String },
    #[error("{op}: function has no closed-form oracle")]
    MissingOracle { op: &'static str },
    #[error("{op}: NoConvergence after {iterations} iterations (gap {gap:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        gap: f64,
    },
    #[error("{op}: EmptyIntersection (alternating projections stalled at residual {residual:e})")]
    EmptyIntersection { op: &'static str, residual: f64 },
    #[error("{op}: EnvelopeViolation at {point:?}: value {value} outside [{lower}, {upper}]")]
    EnvelopeViolation {
        op: &'static str,
        point: Vec<f64>,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("{op}: NotOrdered: psi exceeds phi by {excess:e} at {point:?} (pair {phi_index},{psi_index})")]
    NotOrdered {
        op: &'static str,
        phi_index: usize,
        psi_index: usize,
        point: Vec<f64>,
        excess: f64,
    },
    #[error("{op}: SaddleGap {gap:e} at coordinate {coordinate}")]
    SaddleGap {
        op: &'static str,
        coordinate: usize,
        gap: f64,
    },
    #[error("{op}: schema violation at {path}: {reason}")]
    Schema {
        op: &'static str,
        path: String,
        reason: String,
    },
    #[error("{op}: function is not bounded on the unit sphere")]
    Unbounded { op: &'static str },
}

/// Coarse classification used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoConvergence { .. }
            | Error::EmptyIntersection { .. }
            | Error::SaddleGap { .. }
            | Error::EnvelopeViolation { .. }
            | Error::NotOrdered { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Input,
        }
    }

    /// Name of the operation that raised the error.
    pub fn op(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { op, .. }
            | Error::IndexOutOfRange { op, .. }
            | Error::InvalidInput { op, .. }
            | Error::LatticeMismatch { op, .. }
            | Error::EmptyFamily { op }
            | Error::UnknownBuiltin { op, .. }
            | Error::MissingOracle { op }
            | Error::NoConvergence { op, .. }
            | Error::EmptyIntersection { op, .. }
            | Error::EnvelopeViolation { op, .. }
            | Error::NotOrdered { op, .. }
            | Error::SaddleGap { op, .. }
            | Error::Schema { op, .. }
            | Error::Unbounded { op } => op,
        }
    }
}

pub(crate) fn check_dim(op: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { op, expected, got })
    }
}
