use alloc::vec;
use alloc::vec::Vec;

use alloc::boxed::Box;

use super::{advance_trajectory, AveragedNoise, NoiseSource, SdeModel, StepConfig, StepScratch, StreamNoise};
use crate::rng::NoiseKind;
use crate::C64;
use crate::ensemble::Ensemble;

/// Largest acceptable `|D dt| / |v|` for any drift or noise term.
pub const TIMESTEP_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TermRatio {
    pub term: &'static str,
    pub ratio: f64,
}

/// Per-term step ratios from typical variable magnitudes.
pub trait TermScales {
    /// `magnitudes[i]` is the RMS size of variable `i`; noise terms use their RMS per step, which scales as `sqrt(dt)`.
    fn term_ratios(&self, magnitudes: &[f64], dt: f64) -> Vec<TermRatio>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimestepReport {
    pub ratios: Vec<TermRatio>,
}

impl TimestepReport {
    pub fn worst(&self) -> Option<&TermRatio> {
        self.ratios.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    pub fn acceptable(&self) -> bool {
        self.worst().is_none_or(|w| w.ratio <= TIMESTEP_LIMIT)
    }
}

/// Ratios at the ensemble's RMS magnitudes; only warns, never changes `dt`.
pub fn timestep_check<M: TermScales + ?Sized>(ensemble: &Ensemble, model: &M, dt: f64) -> TimestepReport {
    let m = ensemble.modes();
    let mut sq = vec![0.0; 2 * m];
    let mut n = 0usize;
    for i in 0..ensemble.size() {
        if ensemble.escaped()[i] {
            continue;
        }
        let p = ensemble.point(i);
        for j in 0..m {
            sq[j] += p.alpha[j].norm_sqr();
            sq[m + j] += p.beta[j].norm_sqr();
        }
        n += 1;
    }
    let mags: Vec<f64> = sq.iter().map(|s| libm::sqrt(s / n.max(1) as f64)).collect();
    let mut ratios = model.term_ratios(&mags, dt);
    // merge duplicate labels, keeping the maximum
    ratios.sort_by(|a, b| a.term.cmp(b.term).then(b.ratio.total_cmp(&a.ratio)));
    ratios.dedup_by(|a, b| a.term == b.term);
    let report = TimestepReport { ratios };
    for r in report.ratios.iter().filter(|r| r.ratio > TIMESTEP_LIMIT) {
        log::warn!("time step {dt}: term '{}' moves variables by {:.3} of their size per step", r.term, r.ratio);
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    pub fine: Vec<C64>,
    pub coarse: Vec<C64>,
    /// `max_i |fine_i - coarse_i|`.
    pub discrepancy: f64,
}

/// Integrates one trajectory with `dt` and with `2 dt`, the coarse run seeing the
/// average of each pair of fine noises, so both follow the same Wiener path.
pub fn doubling_check<M, S>(model: &M, v0: &[C64], fine: S, coarse_steps: u64, cfg: &StepConfig, fine_again: S) -> DoublingReport
where
    M: SdeModel + ?Sized,
    S: NoiseSource,
{
    let mut scratch = StepScratch::new(model);
    let mut f = v0.to_vec();
    let mut noise = fine;
    advance_trajectory(model, &mut f, &mut noise, 0, 2 * coarse_steps, cfg, &mut scratch);
    let mut c = v0.to_vec();
    let coarse_cfg = StepConfig { dt: 2.0 * cfg.dt, ..*cfg };
    let mut paired = AveragedNoise::new(fine_again, model.noise_count());
    advance_trajectory(model, &mut c, &mut paired, 0, coarse_steps, &coarse_cfg, &mut scratch);
    let discrepancy = f.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    DoublingReport { fine: f, coarse: c, discrepancy }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Fine step of this level; the coarse run uses twice this.
    pub dt: f64,
    /// Mean over trajectories of the doubling discrepancy.
    pub discrepancy: f64,
}

fn tape(seed: u64, trajectory: u64, kind: NoiseKind, averaging: u32) -> Box<dyn NoiseSource> {
    let mut n: Box<dyn NoiseSource> = Box::new(StreamNoise::new(seed, trajectory, kind));
    for _ in 0..averaging {
        n = Box::new(AveragedNoise::new(n, 0));
    }
    n
}

/// Doubling checks at `dt, dt/2, .., dt/2^halvings` over `duration`, one per starting point.
///
/// All levels are driven by one noise tape at the finest step, averaged up as needed,
/// so every level integrates the same Wiener paths.
pub fn doubling_sweep<M: SdeModel + ?Sized>(
    model: &M,
    starts: &[Vec<C64>],
    seed: u64,
    kind: NoiseKind,
    cfg: &StepConfig,
    halvings: u32,
    duration: f64,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for level in 0..=halvings {
        let dt = cfg.dt / (1u64 << level) as f64;
        let coarse_steps = libm::round(duration / (2.0 * dt)).max(1.0) as u64;
        let level_cfg = StepConfig { dt, ..*cfg };
        let mut total = 0.0;
        for (i, v0) in starts.iter().enumerate() {
            let averaging = halvings - level;
            let r = doubling_check(model, v0, tape(seed, i as u64, kind, averaging), coarse_steps, &level_cfg, tape(seed, i as u64, kind, averaging));
            total += r.discrepancy;
        }
        rows.push(SweepRow { dt, discrepancy: total / starts.len().max(1) as f64 });
    }
    rows
}

/// Least-squares slope of `ln discrepancy` against `ln dt`.
pub fn fitted_order(rows: &[SweepRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.discrepancy > 0.0).map(|r| (libm::log(r.dt), libm::log(r.discrepancy))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
