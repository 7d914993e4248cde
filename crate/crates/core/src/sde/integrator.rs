use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::{SdeModel, Split};
use crate::C64;
use crate::ensemble::within_cap;
use crate::rng::{NoiseKind, Purpose, StepNoise, TrajectoryStream};

const SERIES_THRESHOLD: f64 = 1e-6;

/// `v0 e^{tau exp} + (e^{tau exp} - 1) rest / exp + lin tau`, elementwise.
pub fn propagate_substep(v0: &[C64], splits: &[Split], tau: f64, out: &mut [C64]) {
    for ((o, &v), s) in out.iter_mut().zip(v0).zip(splits) {
        let x = s.exp * tau;
        let (growth, integral) = if x.norm() < SERIES_THRESHOLD {
            (C64::new(1.0, 0.0) + x + x * x * 0.5, tau * (C64::new(1.0, 0.0) + x * 0.5 + x * x / 6.0))
        } else {
            let g = x.exp();
            (g, (g - 1.0) / s.exp)
        };
        *o = v * growth + integral * s.rest + s.lin * tau;
    }
}

/// Work buffers sized for one model.
#[derive(Debug, Clone)]
pub struct StepScratch {
    splits: Vec<Split>,
    iterate: Vec<C64>,
    noise: Vec<f64>,
}

impl StepScratch {
    pub fn new<M: SdeModel + ?Sized>(model: &M) -> Self {
        StepScratch {
            splits: vec![Split::default(); model.dim()],
            iterate: vec![C64::new(0.0, 0.0); model.dim()],
            noise: vec![0.0; model.noise_count()],
        }
    }

    pub fn noise_mut(&mut self) -> &mut [f64] {
        &mut self.noise
    }
}

/// One midpoint step from `v` at time `t`, using the noise already in `scratch`.
///
/// `iterations` half-step passes locate the midpoint, all from the same start state;
/// the full step then uses the split evaluated there.
pub fn midpoint_step<M: SdeModel + ?Sized>(
    model: &M,
    v: &mut [C64],
    t: f64,
    dt: f64,
    iterations: u32,
    scratch: &mut StepScratch,
) {
    let StepScratch { splits, iterate, noise } = scratch;
    iterate.copy_from_slice(v);
    for _ in 0..iterations {
        model.split(iterate, t, noise, splits);
        propagate_substep(v, splits, 0.5 * dt, iterate);
    }
    model.split(iterate, t + 0.5 * dt, noise, splits);
    iterate.copy_from_slice(v);
    propagate_substep(iterate, splits, dt, v);
}

/// Supplies the per-step white noise.
pub trait NoiseSource {
    fn fill(&mut self, step: u64, dt: f64, out: &mut [f64]);
}

impl<N: NoiseSource + ?Sized> NoiseSource for Box<N> {
    fn fill(&mut self, step: u64, dt: f64, out: &mut [f64]) {
        (**self).fill(step, dt, out)
    }
}

/// Noise from the trajectory's dynamics stream.
pub struct StreamNoise {
    stream: TrajectoryStream,
    kind: NoiseKind,
}

impl StreamNoise {
    pub fn new(seed: u64, trajectory: u64, kind: NoiseKind) -> Self {
        StreamNoise { stream: TrajectoryStream::new(seed, Purpose::Dynamics, trajectory), kind }
    }
}

impl NoiseSource for StreamNoise {
    fn fill(&mut self, step: u64, dt: f64, out: &mut [f64]) {
        StepNoise::new(&mut self.stream, self.kind, out.len()).draw(step, dt, out);
    }
}

/// Coarse-step noise `(xi_{2k} + xi_{2k+1}) / 2` built from a fine source at half the step.
pub struct AveragedNoise<S> {
    fine: S,
    buf: Vec<f64>,
}

impl<S: NoiseSource> AveragedNoise<S> {
    pub fn new(fine: S, count: usize) -> Self {
        AveragedNoise { fine, buf: vec![0.0; count] }
    }
}

impl<S: NoiseSource> NoiseSource for AveragedNoise<S> {
    fn fill(&mut self, step: u64, dt: f64, out: &mut [f64]) {
        let half = 0.5 * dt;
        self.buf.resize(out.len(), 0.0);
        self.fine.fill(2 * step, half, out);
        self.fine.fill(2 * step + 1, half, &mut self.buf);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = 0.5 * (*o + b);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepConfig {
    pub dt: f64,
    pub iterations: u32,
    pub escape_cap: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { dt: 0.005, iterations: 1, escape_cap: 1e10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrajectoryOutcome {
    pub escaped: bool,
    pub clamps: u64,
}

/// Advances one trajectory over global steps `first_step .. first_step + steps`,
/// where step `k` starts at `t = k dt`. An escaped trajectory is frozen.
pub fn advance_trajectory<M: SdeModel + ?Sized, S: NoiseSource>(
    model: &M,
    v: &mut [C64],
    noise: &mut S,
    first_step: u64,
    steps: u64,
    cfg: &StepConfig,
    scratch: &mut StepScratch,
) -> TrajectoryOutcome {
    let mut out = TrajectoryOutcome::default();
    for k in first_step..first_step + steps {
        let t = k as f64 * cfg.dt;
        noise.fill(k, cfg.dt, &mut scratch.noise);
        out.clamps += model.condition_noise(v, t, &mut scratch.noise) as u64;
        midpoint_step(model, v, t, cfg.dt, cfg.iterations, scratch);
        model.finish_step(v);
        if !within_cap(v, cfg.escape_cap) {
            out.escaped = true;
            break;
        }
    }
    out
}
