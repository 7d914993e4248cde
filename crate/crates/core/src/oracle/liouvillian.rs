use alloc::vec;
use alloc::vec::Vec;

use super::{FockBasis, Ladder};
use crate::C64;
use crate::bose_hubbard::ModelParams;
use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub cutoff: usize,
    /// RK4 step.
    pub dt: f64,
    /// Largest tolerated population on states with some mode at the cutoff.
    pub boundary_tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings { cutoff: 6, dt: 0.01, boundary_tolerance: 1e-8 }
    }
}

/// Square matrix on the truncated basis, row-major. Holds density matrices and
/// the operator-valued intermediates of multi-time evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        DensityMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn vacuum(basis: &FockBasis) -> Self {
        let mut m = Self::zeros(basis.dim());
        m.data[0] = C64::new(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|r| self.get(r, r)).fold(ZERO, |a, b| a + b)
    }

    /// `max |X - X^dagger|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `op * self` for a ladder operator on `mode`.
    pub fn left_multiply(&self, basis: &FockBasis, op: Ladder, mode: usize) -> Self {
        let d = self.dim;
        let cut = basis.cutoff();
        let st = basis.stride(mode);
        let mut out = Self::zeros(d);
        for r in 0..d {
            let n = basis.occupation(r, mode);
            let (src, amp) = match op {
                Ladder::Annihilate if n < cut => (r + st, libm::sqrt((n + 1) as f64)),
                Ladder::Create if n > 0 => (r - st, libm::sqrt(n as f64)),
                _ => continue,
            };
            let (o, s) = (&mut out.data[r * d..(r + 1) * d], &self.data[src * d..(src + 1) * d]);
            for (x, y) in o.iter_mut().zip(s) {
                *x = y * amp;
            }
        }
        out
    }

    /// `self * op` for a ladder operator on `mode`.
    pub fn right_multiply(&self, basis: &FockBasis, op: Ladder, mode: usize) -> Self {
        let d = self.dim;
        let cut = basis.cutoff();
        let st = basis.stride(mode);
        let mut out = Self::zeros(d);
        for c in 0..d {
            let n = basis.occupation(c, mode);
            let (src, amp) = match op {
                Ladder::Annihilate if n > 0 => (c - st, libm::sqrt(n as f64)),
                Ladder::Create if n < cut => (c + st, libm::sqrt((n + 1) as f64)),
                _ => continue,
            };
            for r in 0..d {
                out.data[r * d + c] = self.data[r * d + src] * amp;
            }
        }
        out
    }

    fn axpy(&mut self, a: f64, x: &DensityMatrix) {
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += v * a;
        }
    }
}

/// Generator of the driven, lossy Bose-Hubbard master equation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    basis: FockBasis,
    row_coeff: Vec<C64>,
    col_coeff: Vec<C64>,
    off_diagonal: Vec<Vec<(usize, C64)>>,
    gain: f64,
    loss: f64,
    sqrt_n: Vec<f64>,
}

impl Liouvillian {
    pub fn new(params: &ModelParams, cutoff: usize) -> Result<Self> {
        params.validate()?;
        let basis = FockBasis::new(params.modes, cutoff)?;
        let m = params.modes;
        let d = basis.dim();
        let gain = 0.5 * params.decay * params.thermal_occupation;
        let loss = 0.5 * params.decay * (params.thermal_occupation + 1.0);
        let mut row_coeff = Vec::with_capacity(d);
        let mut col_coeff = Vec::with_capacity(d);
        for r in 0..d {
            let (mut energy, mut damping) = (0.0, 0.0);
            for j in 0..m {
                let n = basis.occupation(r, j) as f64;
                energy += params.hsp(j, j).re * n + 0.5 * params.interaction * n * (n - 1.0);
                let raise_lower = if basis.occupation(r, j) < cutoff { n + 1.0 } else { 0.0 };
                damping += gain * raise_lower + loss * n;
            }
            row_coeff.push(-I * energy - damping);
            col_coeff.push(I * energy - damping);
        }
        let mut off_diagonal: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d];
        for c in 0..d {
            for j in 0..m {
                let nj = basis.occupation(c, j);
                let f = params.drive[j];
                if nj < cutoff && f != ZERO {
                    off_diagonal[c + basis.stride(j)].push((c, f * libm::sqrt((nj + 1) as f64)));
                }
                if nj > 0 && f != ZERO {
                    off_diagonal[c - basis.stride(j)].push((c, f.conj() * libm::sqrt(nj as f64)));
                }
                for k in 0..m {
                    let h = params.hsp(j, k);
                    let nk = basis.occupation(c, k);
                    if j == k || h == ZERO || nk == 0 || nj >= cutoff {
                        continue;
                    }
                    // a+_j a_k |c>
                    let r = c - basis.stride(k) + basis.stride(j);
                    off_diagonal[r].push((c, h * libm::sqrt((nk * (nj + 1)) as f64)));
                }
            }
        }
        for row in &mut off_diagonal {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *row = merged;
        }
        let sqrt_n = (0..=cutoff + 1).map(|n| libm::sqrt(n as f64)).collect();
        Ok(Liouvillian { basis, row_coeff, col_coeff, off_diagonal, gain, loss, sqrt_n })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// `out = L(x)`.
    pub fn apply(&self, x: &DensityMatrix, out: &mut DensityMatrix) {
        let d = self.basis.dim();
        let b = &self.basis;
        let cut = b.cutoff();
        for r in 0..d {
            let rc = self.row_coeff[r];
            let row = &mut out.data[r * d..(r + 1) * d];
            let xr = &x.data[r * d..(r + 1) * d];
            for c in 0..d {
                row[c] = (rc + self.col_coeff[c]) * xr[c];
            }
            for &(k, h) in &self.off_diagonal[r] {
                let hk = -I * h;
                for (o, v) in row.iter_mut().zip(&x.data[k * d..(k + 1) * d]) {
                    *o += hk * v;
                }
            }
            for (k, &xv) in xr.iter().enumerate() {
                if xv == ZERO {
                    continue;
                }
                for &(c, h) in &self.off_diagonal[k] {
                    row[c] += I * xv * h;
                }
            }
            for j in 0..b.modes() {
                let st = b.stride(j);
                let n = b.occupation(r, j);
                if n < cut && self.loss > 0.0 {
                    let src = &x.data[(r + st) * d..(r + st + 1) * d];
                    let amp = 2.0 * self.loss * self.sqrt_n[n + 1];
                    for c in 0..d - st {
                        let nc = b.occupation(c, j);
                        if nc < cut {
                            row[c] += src[c + st] * (amp * self.sqrt_n[nc + 1]);
                        }
                    }
                }
                if n > 0 && self.gain > 0.0 {
                    let src = &x.data[(r - st) * d..(r - st + 1) * d];
                    let amp = 2.0 * self.gain * self.sqrt_n[n];
                    for c in st..d {
                        let nc = b.occupation(c, j);
                        if nc > 0 {
                            row[c] += src[c - st] * (amp * self.sqrt_n[nc]);
                        }
                    }
                }
            }
        }
    }

    /// Fixed-step RK4 over `duration`, with the step shrunk to divide it evenly.
    pub fn evolve(&self, x: &mut DensityMatrix, duration: f64, dt: f64) {
        if duration <= 0.0 {
            return;
        }
        let steps = libm::ceil(duration / dt - 1e-9).max(1.0) as usize;
        let h = duration / steps as f64;
        let d = x.dim();
        let mut k = DensityMatrix::zeros(d);
        let mut acc = DensityMatrix::zeros(d);
        let mut stage = DensityMatrix::zeros(d);
        for _ in 0..steps {
            self.apply(x, &mut k);
            acc.data.copy_from_slice(&k.data);
            stage.data.copy_from_slice(&x.data);
            stage.axpy(0.5 * h, &k);
            self.apply(&stage, &mut k);
            acc.axpy(2.0, &k);
            stage.data.copy_from_slice(&x.data);
            stage.axpy(0.5 * h, &k);
            self.apply(&stage, &mut k);
            acc.axpy(2.0, &k);
            stage.data.copy_from_slice(&x.data);
            stage.axpy(h, &k);
            self.apply(&stage, &mut k);
            acc.axpy(1.0, &k);
            x.axpy(h / 6.0, &acc);
        }
    }

    /// Population on states with some mode at the cutoff.
    pub fn boundary_population(&self, rho: &DensityMatrix) -> f64 {
        (0..self.basis.dim()).filter(|&r| self.basis.on_boundary(r)).map(|r| rho.get(r, r).re).sum()
    }

    pub fn check_cutoff(&self, rho: &DensityMatrix, tolerance: f64) -> Result<()> {
        let p = self.boundary_population(rho);
        if !p.is_finite() {
            return Err(Error::NonFinite("oracle density matrix"));
        }
        if p > tolerance {
            return Err(Error::CutoffExceeded { cutoff: self.basis.cutoff(), population: p });
        }
        Ok(())
    }

    /// Evolves the vacuum for `duration` and checks the truncation.
    pub fn state_from_vacuum(&self, duration: f64, settings: &OracleSettings) -> Result<DensityMatrix> {
        let mut rho = DensityMatrix::vacuum(&self.basis);
        self.evolve(&mut rho, duration, settings.dt);
        self.check_cutoff(&rho, settings.boundary_tolerance)?;
        Ok(rho)
    }

    /// `Tr(a+_j a_j rho)`.
    pub fn occupation(&self, rho: &DensityMatrix, mode: usize) -> f64 {
        (0..self.basis.dim()).map(|r| self.basis.occupation(r, mode) as f64 * rho.get(r, r).re).sum()
    }
}
