//! Multi-time expectations by the quantum regression theorem.

use alloc::vec::Vec;

use super::{DensityMatrix, Ladder, Liouvillian};
use crate::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedOperator {
    pub op: Ladder,
    pub mode: usize,
    pub time: f64,
}

/// First `k` such that `times[..k]` is nondecreasing and `times[k..]` nonincreasing.
fn split_point(times: &[f64]) -> Option<usize> {
    (0..=times.len()).find(|&k| times[..k].windows(2).all(|w| w[0] <= w[1]) && times[k..].windows(2).all(|w| w[0] >= w[1]))
}

fn apply_at(l: &Liouvillian, x: DensityMatrix, factors: &[TimedOperator], k: usize, time: f64) -> DensityMatrix {
    let b = l.basis();
    let mut x = x;
    for f in factors[k..].iter().rev().filter(|f| f.time == time) {
        // innermost (rightmost in the product) first
        x = x.left_multiply(b, f.op, f.mode);
    }
    for f in factors[..k].iter().filter(|f| f.time == time) {
        x = x.right_multiply(b, f.op, f.mode);
    }
    x
}

/// `<prod factors>` in sequence order, starting from `rho` at time `start <= min time`.
pub fn multitime_expectation(l: &Liouvillian, rho: &DensityMatrix, start: f64, factors: &[TimedOperator], dt: f64) -> Result<C64> {
    if factors.iter().any(|f| f.mode >= l.basis().modes()) {
        return Err(Error::InvalidParameter("operator mode outside the oracle basis"));
    }
    let times: Vec<f64> = factors.iter().map(|f| f.time).collect();
    if times.iter().any(|&t| t < start) {
        return Err(Error::InvalidParameter("operator time precedes the supplied state"));
    }
    let k = split_point(&times).ok_or(Error::NotTimeOrdered)?;
    let mut distinct = times.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut x = rho.clone();
    let mut now = start;
    for &t in &distinct {
        l.evolve(&mut x, t - now, dt);
        now = t;
        x = apply_at(l, x, factors, k, t);
    }
    Ok(x.trace())
}

/// Two-time expectations on a delay grid: factors flagged `true` act at `t0 + tau`, others at `t0`.
///
/// `rho` is the state at `t0`; `taus` must be nondecreasing and nonnegative.
pub fn multitime_delay_grid(l: &Liouvillian, rho: &DensityMatrix, factors: &[(Ladder, usize, bool)], taus: &[f64], dt: f64) -> Result<Vec<C64>> {
    if taus.windows(2).any(|w| w[1] < w[0]) || taus.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("delay grid must be nondecreasing from zero"));
    }
    let labelled = |late: f64| -> Vec<TimedOperator> {
        factors.iter().map(|&(op, mode, delayed)| TimedOperator { op, mode, time: if delayed { late } else { 0.0 } }).collect()
    };
    let probe = labelled(1.0);
    if probe.iter().any(|f| f.mode >= l.basis().modes()) {
        return Err(Error::InvalidParameter("operator mode outside the oracle basis"));
    }
    let times: Vec<f64> = probe.iter().map(|f| f.time).collect();
    let k = split_point(&times).ok_or(Error::NotTimeOrdered)?;
    let mut x = apply_at(l, rho.clone(), &probe, k, 0.0);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        l.evolve(&mut x, tau - now, dt);
        now = tau;
        out.push(apply_at(l, x.clone(), &probe, k, 1.0).trace());
    }
    Ok(out)
}
