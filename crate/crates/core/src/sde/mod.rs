//! Semi-implicit midpoint integration of split-drift SDEs.
//!
//! Each variable's total rate, noise included, is written as
//! `exp * v + rest + lin` and advanced with the exact exponential solution of
//! the frozen linear part.

mod correction;
mod diagnostics;
mod integrator;

pub use correction::{weak_correction, NoiseGain, NoiseStructure};
pub use diagnostics::{doubling_check, doubling_sweep, fitted_order, timestep_check, DoublingReport, SweepRow, TermRatio, TermScales, TimestepReport, TIMESTEP_LIMIT};
pub use integrator::{
    advance_trajectory, midpoint_step, propagate_substep, AveragedNoise, NoiseSource, StepConfig, StepScratch,
    StreamNoise, TrajectoryOutcome,
};

use crate::C64;

/// Rate decomposition of one variable: `dv/dt = exp * v + rest + lin`.
///
/// `exp` and `rest` go through the exponential propagator, `lin` is stepped linearly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Split {
    pub exp: C64,
    pub rest: C64,
    pub lin: C64,
}

impl Split {
    pub fn rate(&self, v: C64) -> C64 {
        self.exp * v + self.rest + self.lin
    }
}

/// A stochastic model in split form.
///
/// `noise` holds real white noises of variance `1 / dt`, fixed for the whole step.
pub trait SdeModel: Sync {
    fn dim(&self) -> usize;

    fn noise_count(&self) -> usize;

    fn split(&self, v: &[C64], t: f64, noise: &[f64], out: &mut [Split]);

    /// Hook to reshape the white noise from the start-of-step state; returns how many
    /// diffusion eigenvalues had to be clamped.
    fn condition_noise(&self, _v0: &[C64], _t: f64, _noise: &mut [f64]) -> u32 {
        0
    }

    /// Hook applied after every completed step.
    fn finish_step(&self, _v: &mut [C64]) {}
}
