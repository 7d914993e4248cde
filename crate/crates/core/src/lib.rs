//! Phase-space stochastic simulation of driven-dissipative boson modes.
//!
//! Trajectories live in doubled phase space in one of the s-ordered
//! representations (positive-P, doubled-Wigner, doubled-Q) and can be moved
//! to lower orderings mid-run. Multi-time correlations are planned onto
//! snapshots in those orderings and checked against a truncated Fock-space
//! master-equation solver.

#![no_std]

extern crate alloc;

pub mod bose_hubbard;
pub mod ensemble;
pub mod error;
pub mod multitime;
pub mod oracle;
pub mod repr;
pub mod rng;
pub mod sde;
pub mod stats;

pub use num_complex;

pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use repr::SOrder;
