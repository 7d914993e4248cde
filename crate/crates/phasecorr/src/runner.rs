//! Parallel trajectory stepping and the record/switch protocol for delay correlations.

use std::time::Instant;

use phasecorr_core::bose_hubbard::{BoseHubbard, ClassicalP, ModelParams, Propagator};
use phasecorr_core::ensemble::Ensemble;
use phasecorr_core::multitime::{Phase, Plan, SnapshotStore};
use phasecorr_core::rng::NoiseKind;
use phasecorr_core::sde::{advance_trajectory, timestep_check, SdeModel, StepConfig, StepScratch, StreamNoise, TimestepReport};
use phasecorr_core::stats::Estimate;
use phasecorr_core::SOrder;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::AppError;

/// Thread pool wrapper; results never depend on the worker count.
pub struct Workers {
    pool: ThreadPool,
}

impl Workers {
    pub fn new(count: Option<usize>) -> Result<Self, AppError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = count {
            b = b.num_threads(n.max(1));
        }
        Ok(Workers { pool: b.build().map_err(|e| AppError::Numerical(e.to_string()))? })
    }

    pub fn count(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Advances every live trajectory by `steps` steps starting at global step `first`.
    /// Returns diffusion clamp events.
    pub fn advance<M: SdeModel>(&self, ens: &mut Ensemble, model: &M, first: u64, steps: u64, cfg: &StepConfig, noise: NoiseKind) -> u64 {
        let seed = ens.seed();
        let (data, escaped, width) = ens.split_mut();
        let clamps = self.pool.install(|| {
            data.par_chunks_mut(width)
                .zip(escaped.par_iter_mut())
                .enumerate()
                .map_init(
                    || StepScratch::new(model),
                    |scratch, (i, (v, esc))| {
                        if *esc {
                            return 0;
                        }
                        let mut source = StreamNoise::new(seed, i as u64, noise);
                        let out = advance_trajectory(model, v, &mut source, first, steps, cfg, scratch);
                        *esc = out.escaped;
                        out.clamps
                    },
                )
                .sum()
        });
        ens.set_time((first + steps) as f64 * cfg.dt);
        clamps
    }
}

/// Which equations drive an ensemble of a given ordering.
pub enum Dynamics {
    Doubled(BoseHubbard),
    Classical(ClassicalP),
}

/// Integration choices for the doubled-phase-space equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelVariant {
    pub propagator: Propagator,
    pub corrected: bool,
}

impl Default for ModelVariant {
    fn default() -> Self {
        ModelVariant { propagator: Propagator::Exponential, corrected: true }
    }
}

impl Dynamics {
    pub fn for_order(params: &ModelParams, order: SOrder) -> Result<Self, AppError> {
        Self::with_variant(params, order, ModelVariant::default())
    }

    pub fn with_variant(params: &ModelParams, order: SOrder, variant: ModelVariant) -> Result<Self, AppError> {
        Ok(if order.is_classical() {
            Dynamics::Classical(ClassicalP::new(params.clone())?)
        } else {
            let m = BoseHubbard::new(params.clone(), order)?.with_propagator(variant.propagator);
            Dynamics::Doubled(if variant.corrected { m } else { m.without_correction() })
        })
    }

    pub fn advance(&self, w: &Workers, ens: &mut Ensemble, first: u64, steps: u64, cfg: &StepConfig, noise: NoiseKind) -> u64 {
        match self {
            Dynamics::Doubled(m) => w.advance(ens, m, first, steps, cfg, noise),
            Dynamics::Classical(m) => w.advance(ens, m, first, steps, cfg, noise),
        }
    }

    /// Step-size heuristic at the ensemble's current magnitudes; classical-P uses the
    /// positive-P term scales, whose drift terms coincide.
    pub fn timestep_report(&self, ens: &Ensemble, dt: f64) -> Result<TimestepReport, AppError> {
        Ok(match self {
            Dynamics::Doubled(m) => timestep_check(ens, m, dt),
            Dynamics::Classical(m) => timestep_check(ens, &BoseHubbard::new(m.params().clone(), SOrder::POSITIVE_P)?, dt),
        })
    }
}

/// Advances `ens` to `until`, recording occupations every `every` steps (0 = never).
pub fn evolve_to(
    w: &Workers,
    dynamics: &Dynamics,
    ens: &mut Ensemble,
    until: f64,
    step: &StepConfig,
    noise: NoiseKind,
    every: u64,
    blocks: usize,
    records: &mut Vec<OccupationRecord>,
) -> Result<u64, AppError> {
    let mut k = steps_for(ens.time(), step.dt)?;
    let end = steps_for(until, step.dt)?;
    let mut clamps = 0;
    while k < end {
        let n = if every > 0 { (every - k % every).min(end - k) } else { end - k };
        clamps += dynamics.advance(w, ens, k, n, step, noise);
        k += n;
        if every > 0 && k % every == 0 {
            records.push(occupation_record(ens, blocks)?);
        }
    }
    ens.set_time(until);
    Ok(clamps)
}

pub fn occupation_record(e: &Ensemble, blocks: usize) -> Result<OccupationRecord, AppError> {
    let values = (0..e.modes()).map(|j| e.ordered_occupation(j, blocks)).collect::<Result<Vec<_>, _>>()?;
    Ok(OccupationRecord { time: e.time(), order: e.order(), values })
}

/// Converts a time to a whole number of steps.
pub fn steps_for(time: f64, dt: f64) -> Result<u64, AppError> {
    let k = (time / dt).round();
    if k < 0.0 || ((k * dt - time).abs() > 1e-9 * time.abs().max(1.0)) {
        return Err(AppError::Config(format!("time {time} is not a whole number of steps of {dt}")));
    }
    Ok(k as u64)
}

#[derive(Debug, Clone)]
pub struct DelayProtocol {
    pub params: ModelParams,
    pub initial: SOrder,
    pub size: usize,
    pub blocks: usize,
    pub seed: u64,
    pub step: StepConfig,
    pub noise: NoiseKind,
    pub variant: ModelVariant,
    pub t0: f64,
    /// Nondecreasing delays, each a whole number of steps.
    pub taus: Vec<f64>,
    /// Convert a copy of the samples to doubled-Q at `t0`.
    pub switch_at_t0: bool,
    /// Keep evolving positive-P samples after `t0` as well.
    pub keep_normal: bool,
    /// Record occupations every this many steps (0 = never).
    pub occupation_every: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub escaped: usize,
    pub clamps: u64,
    pub wall_seconds: f64,
}

/// Occupations of every mode at one time, from whichever branch carries the run.
#[derive(Debug, Clone)]
pub struct OccupationRecord {
    pub time: f64,
    pub order: SOrder,
    pub values: Vec<Estimate>,
}

/// Called at each delay with a store holding the `t0` snapshots and the current ones.
pub trait DelayObserver {
    fn observe(&mut self, index: usize, tau: f64, store: &SnapshotStore) -> Result<(), AppError>;
}

impl<F: FnMut(usize, f64, &SnapshotStore) -> Result<(), AppError>> DelayObserver for F {
    fn observe(&mut self, index: usize, tau: f64, store: &SnapshotStore) -> Result<(), AppError> {
        self(index, tau, store)
    }
}

/// Which branches and snapshots a set of plans needs.
pub fn branches_for(plans: &[Plan]) -> (bool, bool) {
    let mut switch = false;
    let mut keep_normal = false;
    for p in plans {
        for (label, phase) in p.required_snapshots() {
            match phase {
                Phase::AntiNormal => switch = true,
                Phase::Normal if label > 0 => keep_normal = true,
                Phase::Normal => {}
            }
        }
    }
    (switch, keep_normal)
}

pub struct DelayOutcome {
    pub stats: RunStats,
    pub occupations: Vec<OccupationRecord>,
    /// Ensemble at `t0` before any switch.
    pub at_t0: Ensemble,
    /// Positive-P branch at the last delay if it was kept, else the doubled-Q branch.
    pub last: Ensemble,
}

/// Evolves from the ordering's vacuum (or `start`) to `t0`, snapshots, optionally
/// switches a copy to doubled-Q, then walks the delay grid calling `observer`.
pub fn run_delays<O: DelayObserver>(w: &Workers, proto: &DelayProtocol, start: Option<Ensemble>, observer: &mut O) -> Result<DelayOutcome, AppError> {
    let clock = Instant::now();
    let dt = proto.step.dt;
    let every = proto.occupation_every;
    let mut stats = RunStats::default();
    let mut occupations = Vec::new();
    let mut ens = match start {
        Some(e) => e,
        None => Ensemble::vacuum(proto.params.modes, proto.size, proto.initial, proto.seed)?,
    };
    let dynamics = Dynamics::with_variant(&proto.params, ens.order(), proto.variant)?;
    if steps_for(proto.t0, dt)? < steps_for(ens.time(), dt)? {
        return Err(AppError::Config("correlation start precedes the initial ensemble time".into()));
    }
    if every > 0 {
        occupations.push(occupation_record(&ens, proto.blocks)?);
    }
    stats.clamps += evolve_to(w, &dynamics, &mut ens, proto.t0, &proto.step, proto.noise, every, proto.blocks, &mut occupations)?;
    let at_t0 = ens.clone();
    let mut base = SnapshotStore::new();
    base.record(&ens)?;
    let mut anti = if proto.switch_at_t0 {
        let q = ens.convert(SOrder::DOUBLED_Q)?;
        base.record(&q)?;
        Some((q, Dynamics::with_variant(&proto.params, SOrder::DOUBLED_Q, proto.variant)?))
    } else {
        None
    };
    let mut normal = if proto.keep_normal || anti.is_none() { Some(ens) } else { None };
    let mut k = steps_for(proto.t0, dt)?;
    for (idx, &tau) in proto.taus.iter().enumerate() {
        let target = steps_for(proto.t0 + tau, dt)?;
        if target < k {
            return Err(AppError::Config("delays must be nondecreasing".into()));
        }
        while k < target {
            let n = if every > 0 { (every - k % every).min(target - k) } else { target - k };
            if let Some(e) = normal.as_mut() {
                stats.clamps += dynamics.advance(w, e, k, n, &proto.step, proto.noise);
            }
            if let Some((q, dq)) = anti.as_mut() {
                stats.clamps += dq.advance(w, q, k, n, &proto.step, proto.noise);
            }
            k += n;
            if every > 0 && k % every == 0 {
                let lead = normal.as_ref().or(anti.as_ref().map(|a| &a.0)).expect("one branch is always live");
                occupations.push(occupation_record(lead, proto.blocks)?);
            }
        }
        let mut store = base.clone();
        let late = proto.t0 + tau;
        if let Some(e) = normal.as_mut() {
            e.set_time(late);
            store.record(e)?;
        }
        if let Some((q, _)) = anti.as_mut() {
            q.set_time(late);
            store.record(q)?;
        }
        observer.observe(idx, tau, &store)?;
    }
    stats.escaped = normal.iter().chain(anti.iter().map(|a| &a.0)).map(|e| e.escaped_count()).max().unwrap_or(0).max(at_t0.escaped_count());
    stats.wall_seconds = clock.elapsed().as_secs_f64();
    let last = match (normal, anti) {
        (Some(e), _) => e,
        (None, Some((q, _))) => q,
        (None, None) => unreachable!("one branch is always live"),
    };
    Ok(DelayOutcome { stats, occupations, at_t0, last })
}
