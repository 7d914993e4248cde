//! Brute-force reference: the master equation in a truncated number basis.

mod basis;
mod liouvillian;
mod regression;

pub use basis::FockBasis;
pub use liouvillian::{DensityMatrix, Liouvillian, OracleSettings};
pub use regression::{multitime_delay_grid, multitime_expectation, TimedOperator};
pub use crate::multitime::Ladder;
