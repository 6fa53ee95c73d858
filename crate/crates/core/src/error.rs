use thiserror::Error;

use crate::lattice::Boundary;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {what} must be at least {min}, got {got}")]
    InvalidDimension {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("shape mismatch: expected length {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("index {index} out of range (size {len})")]
    Index { index: usize, len: usize },

    #[error("operation requires a {expected:?} lattice")]
    UnsupportedBoundary { expected: Boundary },

    #[error("instance too large: needs 2^{required} enumerated states, limit is 2^{limit}")]
    InstanceTooLarge { required: usize, limit: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("{name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("no crossing found in the scanned range: {0}")]
    NotBracketed(String),

    #[error("X check {x_check} and Z check {z_check} overlap on an odd number of qubits")]
    NotCommuting { x_check: usize, z_check: usize },

    #[error("code has no {0} checks")]
    EmptySector(&'static str),

    #[error("hypergraph is not dualizable: isolated vertices {0:?}")]
    NotDualizable(Vec<usize>),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    domain: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}
