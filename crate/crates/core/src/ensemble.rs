//! Trajectory ensembles in doubled phase space.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;
use crate::error::{Error, Result};
use crate::repr::SOrder;
use crate::rng::{Purpose, TrajectoryStream};
use crate::stats::{BlockAccumulator, Estimate};

/// One sample `{alpha_j, beta_j}` borrowed from an ensemble.
#[derive(Debug, Clone, Copy)]
pub struct PhasePoint<'a> {
    pub alpha: &'a [C64],
    pub beta: &'a [C64],
}

/// `S` trajectories of `M` modes in a single ordering, stored as `[alpha.., beta..]` per trajectory.
#[derive(Debug, Clone)]
pub struct Ensemble {
    modes: usize,
    order: SOrder,
    time: f64,
    seed: u64,
    conversions: u32,
    data: Vec<C64>,
    escaped: Vec<bool>,
}

impl Ensemble {
    pub fn from_raw(modes: usize, order: SOrder, time: f64, seed: u64, data: Vec<C64>) -> Result<Self> {
        if modes == 0 || data.len() % (2 * modes) != 0 || data.is_empty() {
            return Err(Error::Shape("trajectory data is not a whole number of 2M-vectors"));
        }
        let size = data.len() / (2 * modes);
        Ok(Ensemble { modes, order, time, seed, conversions: 0, data, escaped: vec![false; size] })
    }

    /// Every trajectory starts in the vacuum of the requested ordering.
    pub fn vacuum(modes: usize, size: usize, order: SOrder, seed: u64) -> Result<Self> {
        Self::coherent(&vec![C64::new(0.0, 0.0); modes], size, order, seed)
    }

    /// Coherent state `|amplitudes>`: exact in positive-P, broadened by the conversion kernel otherwise.
    pub fn coherent(amplitudes: &[C64], size: usize, order: SOrder, seed: u64) -> Result<Self> {
        let modes = amplitudes.len();
        if size == 0 {
            return Err(Error::InvalidParameter("ensemble size must be positive"));
        }
        let mut data = Vec::with_capacity(size * 2 * modes);
        for _ in 0..size {
            data.extend_from_slice(amplitudes);
            data.extend(amplitudes.iter().map(|a| a.conj()));
        }
        let mut ens = Ensemble::from_raw(modes, SOrder::POSITIVE_P, 0.0, seed, data)?;
        if order.is_classical() {
            ens.order = SOrder::CLASSICAL_P;
        } else if !order.same_order(SOrder::POSITIVE_P) {
            ens.broaden(order, Purpose::Initial);
        }
        Ok(ens)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn size(&self) -> usize {
        self.escaped.len()
    }

    pub fn order(&self) -> SOrder {
        self.order
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> PhasePoint<'_> {
        let w = 2 * self.modes;
        let v = &self.data[i * w..(i + 1) * w];
        PhasePoint { alpha: &v[..self.modes], beta: &v[self.modes..] }
    }

    pub fn raw(&self) -> &[C64] {
        &self.data
    }

    pub fn escaped(&self) -> &[bool] {
        &self.escaped
    }

    pub fn escaped_count(&self) -> usize {
        self.escaped.iter().filter(|&&e| e).count()
    }

    /// Mutable `(trajectory state, escaped flag)` pairs, in trajectory order.
    pub fn trajectories_mut(&mut self) -> impl Iterator<Item = (&mut [C64], &mut bool)> {
        self.data.chunks_exact_mut(2 * self.modes).zip(self.escaped.iter_mut())
    }

    pub fn split_mut(&mut self) -> (&mut [C64], &mut [bool], usize) {
        (&mut self.data, &mut self.escaped, 2 * self.modes)
    }

    /// Moves samples to a lower ordering parameter by adding the Gaussian
    /// kernel `sqrt((s0 - s) / 2) zeta` to `alpha` and its conjugate to `beta`.
    ///
    /// Fresh noise is drawn per mode and trajectory; successive conversions use independent streams.
    pub fn convert(&self, target: SOrder) -> Result<Ensemble> {
        if target.s() > self.order.s() {
            return Err(Error::OrderingDirection { from: self.order.s(), to: target.s() });
        }
        let mut out = self.clone();
        if !target.same_order(self.order) {
            out.broaden(target, Purpose::Conversion(self.conversions));
            out.conversions = self.conversions + 1;
        }
        Ok(out)
    }

    fn broaden(&mut self, target: SOrder, purpose: Purpose) {
        let width = libm::sqrt(0.5 * (self.order.s() - target.s()));
        let m = self.modes;
        let seed = self.seed;
        for (i, (v, _)) in self.trajectories_mut().enumerate() {
            let mut stream = TrajectoryStream::new(seed, purpose, i as u64);
            let mut z = vec![0.0; 2 * m];
            stream.fill_normals(crate::rng::NoiseKind::Gaussian, &mut z);
            for j in 0..m {
                // <zeta zeta*> = 1, <zeta zeta> = 0
                let zeta = C64::new(z[2 * j], z[2 * j + 1]) * core::f64::consts::FRAC_1_SQRT_2;
                v[j] += width * zeta;
                v[m + j] += width * zeta.conj();
            }
        }
        self.order = SOrder::new(target.s()).unwrap_or(target);
    }

    /// Average of `f` over non-escaped trajectories, blocked into `blocks` sub-ensembles.
    pub fn average<F>(&self, blocks: usize, f: F) -> Result<Estimate>
    where
        F: Fn(PhasePoint<'_>) -> C64,
    {
        let mut acc = BlockAccumulator::new(self.size(), blocks)?;
        for i in 0..self.size() {
            if !self.escaped[i] {
                acc.push(i, f(self.point(i)));
            }
        }
        acc.finish()
    }

    /// Normally ordered occupation `Re <alpha_j beta_j>`; positive-P or classical-P only.
    pub fn occupation(&self, mode: usize, blocks: usize) -> Result<Estimate> {
        if !self.order.is_normal() {
            return Err(Error::RepresentationMismatch { expected: SOrder::POSITIVE_P, found: self.order });
        }
        self.ordered_occupation(mode, blocks)
    }

    /// Occupation from any ordering, subtracting the ordering offset `(1 - s) / 2`.
    pub fn ordered_occupation(&self, mode: usize, blocks: usize) -> Result<Estimate> {
        if mode >= self.modes {
            return Err(Error::InvalidParameter("mode index out of range"));
        }
        let offset = self.order.vacuum_offset();
        let mut e = self.average(blocks, |p| C64::new((p.alpha[mode] * p.beta[mode]).re - offset, 0.0))?;
        e.err_im = 0.0;
        Ok(e)
    }

    /// Marks every trajectory whose state is non-finite or exceeds `cap` in modulus; returns the newly escaped count.
    pub fn flag_escapes(&mut self, cap: f64) -> usize {
        let mut newly = 0;
        for (v, esc) in self.trajectories_mut() {
            if !*esc && !within_cap(v, cap) {
                *esc = true;
                newly += 1;
            }
        }
        newly
    }
}

pub fn within_cap(v: &[C64], cap: f64) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite() && z.norm_sqr() <= cap * cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_moments_per_order() {
        for (order, expect) in [(SOrder::POSITIVE_P, 0.0), (SOrder::DOUBLED_WIGNER, 0.5), (SOrder::DOUBLED_Q, 1.0)] {
            let e = Ensemble::vacuum(2, 4096, order, 11).unwrap();
            let ab = e.average(32, |p| p.alpha[0] * p.beta[0]).unwrap();
            assert!(ab.sigma_re(expect, 1e-12) < 5.0, "{order}: {}", ab.value);
            assert!(ab.value.im.abs() < 1e-12);
            let aa = e.average(32, |p| p.alpha[1] * p.alpha[1]).unwrap();
            assert!(aa.value.norm() < 5.0 * (aa.err_re + aa.err_im + 1e-12));
            let n = e.ordered_occupation(0, 32).unwrap();
            assert!(n.sigma_re(0.0, 1e-12) < 5.0);
        }
    }

    #[test]
    fn beta_is_conjugate_after_conversion() {
        let e = Ensemble::coherent(&[C64::new(0.3, -0.2)], 64, SOrder::DOUBLED_Q, 2).unwrap();
        for i in 0..e.size() {
            let p = e.point(i);
            assert!((p.beta[0] - p.alpha[0].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn upward_conversion_rejected() {
        let e = Ensemble::vacuum(1, 8, SOrder::DOUBLED_Q, 0).unwrap();
        assert!(matches!(e.convert(SOrder::POSITIVE_P), Err(Error::OrderingDirection { .. })));
        assert!(matches!(e.occupation(0, 2), Err(Error::RepresentationMismatch { .. })));
    }

    #[test]
    fn repeated_conversions_use_fresh_noise() {
        let e = Ensemble::vacuum(1, 16, SOrder::POSITIVE_P, 5).unwrap();
        let w = e.convert(SOrder::DOUBLED_WIGNER).unwrap();
        let q1 = w.convert(SOrder::DOUBLED_Q).unwrap();
        let q2 = e.convert(SOrder::DOUBLED_Q).unwrap();
        // kernel widths: P->W sqrt(1/2), P->Q 1
        let d = (w.point(0).alpha[0] - e.point(0).alpha[0]).norm();
        assert!(d > 0.0);
        assert_ne!(q1.point(0).alpha[0], q2.point(0).alpha[0]);
    }

    #[test]
    fn escapes_are_flagged_once() {
        let mut e = Ensemble::from_raw(1, SOrder::POSITIVE_P, 0.0, 0, vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(f64::NAN, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert_eq!(e.flag_escapes(1e10), 1);
        assert_eq!(e.flag_escapes(1e10), 0);
        assert_eq!(e.escaped_count(), 1);
    }
}
