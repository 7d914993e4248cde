use thiserror::Error;

use crate::repr::SOrder;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ordering parameter {0} outside [-1, 1]")]
    InvalidOrder(f64),
    #[error("cannot convert from s = {from} to s = {to}: conversion only lowers the ordering parameter")]
    OrderingDirection { from: f64, to: f64 },
    #[error("estimator requires {expected:?} samples, ensemble holds {found:?}")]
    RepresentationMismatch { expected: SOrder, found: SOrder },
    #[error("no snapshot recorded at t = {time} in s = {order}")]
    MissingSnapshot { time: f64, order: f64 },
    #[error("normalisation {value:e} is not resolved from zero (error {error:e})")]
    DivisionByZero { value: f64, error: f64 },
    #[error("Fock cutoff {cutoff} too small: top-level population {population:e}")]
    CutoffExceeded { cutoff: usize, population: f64 },
    #[error("operator product is not in time-ordered form")]
    NotTimeOrdered,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
