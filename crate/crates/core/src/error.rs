use thiserror::Error;

use crate::IndexSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polyhedron: {0}")]
    InvalidPolyhedron(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("simplex solver failed: {0}")]
    LpNumericalFailure(String),
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("half-space family is not in general position (witness {0})")]
    NotGeneralPosition(IndexSet),
    #[error("Gram submatrix on {0} is singular")]
    SingularGram(IndexSet),
    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,
    #[error("far-field radius {radius:.3} is below the required {required}")]
    ShiftTooSmall { radius: f64, required: f64 },
    #[error("no shift direction separates every face from its neighbours (margin {0:.3e})")]
    NoFarField(f64),
    #[error("initialization did not converge: doubling gap {gap:.3e} after {retries} retries")]
    ShiftRetriesExhausted { gap: f64, retries: usize },
    #[error("step size underflow at s = {at}")]
    StepUnderflow { at: f64 },
    #[error("non-finite state during integration at s = {at}")]
    NonFiniteState { at: f64 },
    #[error("path crosses the singular locus near s = {at} (det {det:.3e} on {face})")]
    SingularLocusCrossing { at: f64, det: f64, face: IndexSet },
    #[error("index set {0} is not a face of the complex")]
    NotAFace(IndexSet),
}

pub type Result<T> = std::result::Result<T, Error>;
