//! Estimating planned products from recorded snapshots.

use alloc::vec;
use alloc::vec::Vec;

use super::planner::{plan, Phase, Plan};
use super::spec::{CorrelationSpec, Ladder, OperatorFactor};
use crate::C64;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::repr::SOrder;
use crate::stats::{block_error, BlockAccumulator, Estimate};

#[derive(Debug, Clone)]
struct Snapshot {
    time: f64,
    order: SOrder,
    data: Vec<C64>,
    escaped: Vec<bool>,
}

/// Ensemble copies keyed by `(time, ordering)`; one trajectory index refers to
/// the same realisation in every snapshot.
#[derive(Debug, Clone, Default)]
pub struct SnapshotStore {
    modes: usize,
    size: usize,
    snapshots: Vec<Snapshot>,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

impl SnapshotStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, ens: &Ensemble) -> Result<()> {
        if self.snapshots.is_empty() {
            self.modes = ens.modes();
            self.size = ens.size();
        } else if self.modes != ens.modes() || self.size != ens.size() {
            return Err(Error::Shape("snapshot does not match the stored ensemble shape"));
        }
        let order = ens.order();
        self.snapshots.retain(|s| !(same_time(s.time, ens.time()) && s.order.same_order(order)));
        self.snapshots.push(Snapshot { time: ens.time(), order, data: ens.raw().to_vec(), escaped: ens.escaped().to_vec() });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn find(&self, time: f64, phase: Phase) -> Result<&Snapshot> {
        let want = match phase {
            Phase::Normal => SOrder::POSITIVE_P,
            Phase::AntiNormal => SOrder::DOUBLED_Q,
        };
        self.snapshots
            .iter()
            .find(|s| same_time(s.time, time) && s.order.same_order(want))
            .ok_or(Error::MissingSnapshot { time, order: want.s() })
    }

    /// Occupation `Re <alpha beta>` of `mode` at `time` from the positive-P snapshot.
    pub fn occupation(&self, mode: usize, time: f64, blocks: usize) -> Result<Estimate> {
        let s = self.find(time, Phase::Normal)?;
        let w = 2 * self.modes;
        let mut acc = BlockAccumulator::new(self.size, blocks)?;
        for i in (0..self.size).filter(|&i| !s.escaped[i]) {
            acc.push(i, C64::new((s.data[i * w + mode] * s.data[i * w + self.modes + mode]).re, 0.0));
        }
        acc.finish()
    }
}

/// Actual time of each label of a correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMap(pub Vec<f64>);

impl TimeMap {
    pub fn delay(t0: f64, tau: f64) -> Self {
        TimeMap(vec![t0, t0 + tau])
    }
}

struct Lookup<'a> {
    weight: f64,
    factors: Vec<(&'a Snapshot, usize)>,
}

/// Plan-weighted average over trajectories not escaped in any snapshot used.
pub fn estimate(p: &Plan, store: &SnapshotStore, times: &TimeMap, blocks: usize) -> Result<Estimate> {
    let sch = p.schedule().ok_or(Error::InvalidParameter("correlation has no estimator"))?;
    if times.0.len() < p.spec.time_count() {
        return Err(Error::InvalidParameter("time map shorter than the correlation's time labels"));
    }
    if p.spec.max_mode() >= store.modes() {
        return Err(Error::InvalidParameter("correlation mode outside the ensemble"));
    }
    let m = store.modes();
    let w = 2 * m;
    let mut lookups = Vec::with_capacity(sch.terms.len());
    let mut used: Vec<&Snapshot> = Vec::new();
    for term in &sch.terms {
        let mut factors = Vec::with_capacity(term.factors.len());
        for f in &term.factors {
            let snap = store.find(times.0[f.factor.time], f.phase)?;
            let offset = match f.factor.op {
                Ladder::Annihilate => f.factor.mode,
                Ladder::Create => m + f.factor.mode,
            };
            factors.push((snap, offset));
            if !used.iter().any(|u| core::ptr::eq(*u, snap)) {
                used.push(snap);
            }
        }
        lookups.push(Lookup { weight: term.weight as f64, factors });
    }
    let mut acc = BlockAccumulator::new(store.size(), blocks)?;
    for i in 0..store.size() {
        if used.iter().any(|s| s.escaped[i]) {
            continue;
        }
        let mut value = C64::new(0.0, 0.0);
        for l in &lookups {
            let prod = l.factors.iter().fold(C64::new(1.0, 0.0), |acc, (s, off)| acc * s.data[i * w + off]);
            value += prod * l.weight;
        }
        acc.push(i, value);
    }
    acc.finish()
}

/// Two-label correlation on a delay grid, label 0 at `t0`, label 1 at `t0 + tau`.
pub fn estimate_delays(p: &Plan, store: &SnapshotStore, t0: f64, taus: &[f64], blocks: usize) -> Result<Vec<Estimate>> {
    taus.iter().map(|&tau| estimate(p, store, &TimeMap::delay(t0, tau), blocks)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayCurve {
    pub taus: Vec<f64>,
    pub points: Vec<Estimate>,
}

/// `g_{ab}(tau) = Re<alpha_a beta_a(t0) alpha_b beta_b(t0+tau)> / (n_a(t0) n_b(t0+tau))`,
/// with errors from the spread of per-block ratios to first order.
pub fn g2_delay(store: &SnapshotStore, first: usize, second: usize, t0: f64, taus: &[f64], blocks: usize) -> Result<DelayCurve> {
    if first.max(second) >= store.modes() {
        return Err(Error::InvalidParameter("mode index out of range"));
    }
    let m = store.modes();
    let w = 2 * m;
    let early = store.find(t0, Phase::Normal)?;
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        let late = store.find(t0 + tau, Phase::Normal)?;
        let mut num = BlockAccumulator::new(store.size(), blocks)?;
        let mut na = BlockAccumulator::new(store.size(), blocks)?;
        let mut nb = BlockAccumulator::new(store.size(), blocks)?;
        for i in (0..store.size()).filter(|&i| !early.escaped[i] && !late.escaped[i]) {
            let x = early.data[i * w + first] * early.data[i * w + m + first];
            let y = late.data[i * w + second] * late.data[i * w + m + second];
            num.push(i, x * y);
            na.push(i, x);
            nb.push(i, y);
        }
        let (en, ea, eb) = (num.finish()?, na.finish()?, nb.finish()?);
        for e in [&ea, &eb] {
            if e.value.re.abs() <= e.err_re {
                return Err(Error::DivisionByZero { value: e.value.re, error: e.err_re });
            }
        }
        let g = en.value.re / (ea.value.re * eb.value.re);
        let (bn, ba, bb) = (num.block_means(), na.block_means(), nb.block_means());
        let linear: Vec<C64> = bn
            .iter()
            .zip(&ba)
            .zip(&bb)
            .filter_map(|((n, a), b)| Some((n.as_ref()?, a.as_ref()?, b.as_ref()?)))
            .map(|(n, a, b)| C64::new(g * (n.re / en.value.re - a.re / ea.value.re - b.re / eb.value.re), 0.0))
            .collect();
        let (err, _) = block_error(&linear);
        points.push(Estimate { value: C64::new(g, 0.0), err_re: err, err_im: 0.0, samples: en.samples });
    }
    Ok(DelayCurve { taus: taus.to_vec(), points })
}

/// The four unnormalised two-time products of one mode used to exercise anti-normal and mixed orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCorrelators {
    /// `<a(t0) a(t0+tau) a+(t0+tau) a+(t0)>`
    pub ga: Vec<Estimate>,
    /// `<a(t0+tau)^2 a+(t0)^2>`
    pub gb: Vec<Estimate>,
    /// `<a(t0+tau) a+(t0+tau) a+(t0) a(t0)>`
    pub gc: Vec<Estimate>,
    /// `<a(t0) a+(t0+tau)^2 a(t0)>`
    pub gd: Vec<Estimate>,
}

impl SpecialCorrelators {
    pub fn specs(mode: usize) -> [CorrelationSpec; 4] {
        use OperatorFactor as F;
        let mk = |f: Vec<OperatorFactor>| CorrelationSpec::new(f).expect("labels 0 and 1 present");
        [
            mk(vec![F::annihilate(mode, 0), F::annihilate(mode, 1), F::create(mode, 1), F::create(mode, 0)]),
            mk(vec![F::annihilate(mode, 1), F::annihilate(mode, 1), F::create(mode, 0), F::create(mode, 0)]),
            mk(vec![F::annihilate(mode, 1), F::create(mode, 1), F::create(mode, 0), F::annihilate(mode, 0)]),
            mk(vec![F::annihilate(mode, 0), F::create(mode, 1), F::create(mode, 1), F::annihilate(mode, 0)]),
        ]
    }
}

pub fn special_correlators(store: &SnapshotStore, mode: usize, t0: f64, taus: &[f64], blocks: usize) -> Result<SpecialCorrelators> {
    let [a, b, c, d] = SpecialCorrelators::specs(mode).map(|s| plan(&s));
    Ok(SpecialCorrelators {
        ga: estimate_delays(&a, store, t0, taus, blocks)?,
        gb: estimate_delays(&b, store, t0, taus, blocks)?,
        gc: estimate_delays(&c, store, t0, taus, blocks)?,
        gd: estimate_delays(&d, store, t0, taus, blocks)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multitime::planner::Category;

    #[test]
    fn special_correlator_plans() {
        let cats: Vec<Category> = SpecialCorrelators::specs(1).iter().map(|s| plan(s).schedule().unwrap().category).collect();
        assert_eq!(cats, vec![Category::AntiNormal, Category::AntiNormal, Category::Mixed, Category::Mixed]);
        let d = plan(&SpecialCorrelators::specs(1)[3]);
        let names: Vec<_> = d.schedule().unwrap().terms[0].factors.iter().map(|f| f.variable_name()).collect();
        assert_eq!(names, vec!["alpha'_2(t0)", "beta'_2(t1)", "beta'_2(t1)", "alpha_2(t0)"]);
        assert_eq!(d.schedule().unwrap().switch, Some(0));
    }

    #[test]
    fn missing_snapshot_is_reported() {
        let e = Ensemble::vacuum(1, 8, SOrder::POSITIVE_P, 0).unwrap();
        let mut store = SnapshotStore::new();
        store.record(&e).unwrap();
        let p = plan(&SpecialCorrelators::specs(0)[0]);
        assert!(matches!(estimate(&p, &store, &TimeMap::delay(0.0, 0.0), 2), Err(Error::MissingSnapshot { .. })));
    }

    #[test]
    fn coherent_state_products_are_exact() {
        let amp = C64::new(0.6, -0.3);
        let e = Ensemble::coherent(&[amp], 16, SOrder::POSITIVE_P, 1).unwrap();
        let mut store = SnapshotStore::new();
        store.record(&e).unwrap();
        let g = g2_delay(&store, 0, 0, 0.0, &[0.0], 4).unwrap();
        assert!((g.points[0].value.re - 1.0).abs() < 1e-12);
        let n = store.occupation(0, 0.0, 4).unwrap();
        assert!((n.value.re - amp.norm_sqr()).abs() < 1e-15);
    }
}
