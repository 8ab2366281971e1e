use thiserror::Error;

/// Errors raised by the exact and combinatorial routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("Gamma has a pole at {0}/2")]
    GammaPole(i64),
    #[error("enumeration bound exceeded: {what} = {value} > {bound}")]
    BoundExceeded {
        what: &'static str,
        value: usize,
        bound: usize,
    },
    #[error("map is not connected")]
    Disconnected,
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid labelling: {0}")]
    InvalidLabels(String),
    #[error("vertex {0} is not a 3-node of the skeleton")]
    NotThreeNode(usize),
    #[error("Laurent exponent {0} outside the allowed range [-12, 12]")]
    ExponentOverflow(i32),
    #[error("derivative would need U_{0}")]
    DerivativeTooHigh(usize),
    #[error("elimination failed: {0}")]
    Elimination(String),
    #[error("geodesic walk failed: {0}")]
    Geodesic(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
