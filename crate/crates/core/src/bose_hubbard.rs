//! Driven-dissipative Bose-Hubbard modes in doubled phase space.
//!
//! `H = sum_jk Hsp_jk a+_j a_k + U/2 sum_j a+_j a+_j a_j a_j + sum_j (F_j a+_j + F_j* a_j)`,
//! with single-mode loss at rate `gamma` into a bath of occupation `nbar`.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;
use crate::error::{Error, Result};
use crate::repr::SOrder;
use crate::sde::{NoiseGain, NoiseStructure, SdeModel, Split, TermRatio, TermScales};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub modes: usize,
    pub interaction: f64,
    /// Row-major `modes x modes` single-particle matrix.
    pub single_particle: Vec<C64>,
    pub decay: f64,
    pub thermal_occupation: f64,
    pub drive: Vec<C64>,
}

impl ModelParams {
    /// Open chain: `-detuning` on the diagonal, `-hopping` between neighbours, drive on site 0.
    pub fn chain(modes: usize, interaction: f64, hopping: f64, detuning: f64, decay: f64, thermal: f64, drive: f64) -> Self {
        let mut hsp = vec![C64::new(0.0, 0.0); modes * modes];
        for j in 0..modes {
            hsp[j * modes + j] = C64::new(-detuning, 0.0);
            if j + 1 < modes {
                hsp[j * modes + j + 1] = C64::new(-hopping, 0.0);
                hsp[(j + 1) * modes + j] = C64::new(-hopping, 0.0);
            }
        }
        let mut f = vec![C64::new(0.0, 0.0); modes];
        if modes > 0 {
            f[0] = C64::new(drive, 0.0);
        }
        ModelParams { modes, interaction, single_particle: hsp, decay, thermal_occupation: thermal, drive: f }
    }

    pub fn hsp(&self, j: usize, k: usize) -> C64 {
        self.single_particle[j * self.modes + k]
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.modes;
        if m == 0 {
            return Err(Error::InvalidParameter("at least one mode required"));
        }
        if self.single_particle.len() != m * m || self.drive.len() != m {
            return Err(Error::Shape("single-particle matrix must be M x M and drive of length M"));
        }
        for j in 0..m {
            for k in 0..m {
                if (self.hsp(j, k) - self.hsp(k, j).conj()).norm() > 1e-12 * (1.0 + self.hsp(j, k).norm()) {
                    return Err(Error::InvalidParameter("single-particle matrix is not Hermitian"));
                }
            }
        }
        if !(self.decay >= 0.0) || !(self.thermal_occupation >= 0.0) {
            return Err(Error::InvalidParameter("decay and thermal occupation must be non-negative"));
        }
        let finite = self.interaction.is_finite()
            && self.single_particle.iter().chain(&self.drive).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || !self.decay.is_finite() || !self.thermal_occupation.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(())
    }

    fn links(&self) -> Vec<(usize, usize, C64)> {
        let m = self.modes;
        let mut out = Vec::new();
        for j in 0..m {
            for k in 0..m {
                if j != k && self.hsp(j, k) != C64::new(0.0, 0.0) {
                    out.push((j, k, self.hsp(j, k)));
                }
            }
        }
        out
    }
}

/// How rates are handed to the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagator {
    /// Linear-in-variable terms through the exponential propagator.
    Exponential,
    /// Everything in the linear slot: a plain midpoint scheme.
    Linear,
}

/// Doubled phase-space equations in ordering `s`, noise layout `[xi, xi~, eta_re, eta_im]` per mode.
#[derive(Debug, Clone)]
pub struct BoseHubbard {
    params: ModelParams,
    order: SOrder,
    propagator: Propagator,
    links: Vec<(usize, usize, C64)>,
    kerr_noise: (C64, C64),
    correction: (C64, C64),
    bath_amplitude: f64,
}

impl BoseHubbard {
    pub fn new(params: ModelParams, order: SOrder) -> Result<Self> {
        params.validate()?;
        if order.is_classical() {
            return Err(Error::InvalidParameter("classical-P evolution uses ClassicalP"));
        }
        let s = order.s();
        let u = params.interaction;
        let bath = params.decay * (params.thermal_occupation + 0.5 * (1.0 - s));
        Ok(BoseHubbard {
            links: params.links(),
            kerr_noise: (C64::new(0.0, -s * u).sqrt(), C64::new(0.0, s * u).sqrt()),
            correction: (I * (0.5 * s * u), -I * (0.5 * s * u)),
            bath_amplitude: libm::sqrt(bath.max(0.0)),
            params,
            order,
            propagator: Propagator::Exponential,
        })
    }

    pub fn with_propagator(mut self, propagator: Propagator) -> Self {
        self.propagator = propagator;
        self
    }

    /// Drops the drift terms that compensate the midpoint scheme's Stratonovich bias.
    pub fn without_correction(mut self) -> Self {
        self.correction = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn order(&self) -> SOrder {
        self.order
    }

    /// Rates with explicit noise values, the common body of `split`.
    pub fn rates(&self, v: &[C64], noise: &[f64], out: &mut [Split]) {
        let m = self.params.modes;
        let p = &self.params;
        let s = self.order.s();
        let u = p.interaction;
        let half_decay = 0.5 * p.decay;
        let (ka, kb) = self.kerr_noise;
        let (ca, cb) = self.correction;
        let scale = core::f64::consts::FRAC_1_SQRT_2 * self.bath_amplitude;
        for j in 0..m {
            let (a, b) = (v[j], v[m + j]);
            let nz = &noise[4 * j..4 * j + 4];
            let kerr = -I * u * (a * b + (s - 1.0));
            let diag = p.hsp(j, j);
            let eta = C64::new(nz[2], nz[3]) * scale;
            out[j] = Split {
                exp: kerr - half_decay + ka * nz[0] - I * diag + ca,
                rest: -I * p.drive[j] + eta,
                lin: C64::new(0.0, 0.0),
            };
            out[m + j] = Split {
                exp: -kerr - half_decay + kb * nz[1] + I * diag.conj() + cb,
                rest: I * p.drive[j].conj() + eta.conj(),
                lin: C64::new(0.0, 0.0),
            };
        }
        for &(j, k, h) in &self.links {
            out[j].rest -= I * h * v[k];
            out[m + j].rest += I * h.conj() * v[m + k];
        }
        if self.propagator == Propagator::Linear {
            for (o, &x) in out.iter_mut().zip(v) {
                *o = Split { exp: C64::new(0.0, 0.0), rest: C64::new(0.0, 0.0), lin: o.rate(x) };
            }
        }
    }
}

impl SdeModel for BoseHubbard {
    fn dim(&self) -> usize {
        2 * self.params.modes
    }

    fn noise_count(&self) -> usize {
        4 * self.params.modes
    }

    fn split(&self, v: &[C64], _t: f64, noise: &[f64], out: &mut [Split]) {
        self.rates(v, noise, out);
    }
}

impl NoiseStructure for BoseHubbard {
    fn dim(&self) -> usize {
        2 * self.params.modes
    }

    fn noise_count(&self) -> usize {
        4 * self.params.modes
    }

    fn gain(&self, v: &[C64], _t: f64, var: usize, sigma: usize) -> NoiseGain {
        let m = self.params.modes;
        let (mode, is_beta) = (var % m, var >= m);
        if sigma / 4 != mode {
            return NoiseGain::default();
        }
        let scale = core::f64::consts::FRAC_1_SQRT_2 * self.bath_amplitude;
        let gain = match (sigma % 4, is_beta) {
            (0, false) => NoiseGain { exp: self.kerr_noise.0, ..Default::default() },
            (1, true) => NoiseGain { exp: self.kerr_noise.1, ..Default::default() },
            (2, _) => NoiseGain { rest: C64::new(scale, 0.0), ..Default::default() },
            (3, false) => NoiseGain { rest: C64::new(0.0, scale), ..Default::default() },
            (3, true) => NoiseGain { rest: C64::new(0.0, -scale), ..Default::default() },
            _ => NoiseGain::default(),
        };
        if self.propagator == Propagator::Linear {
            NoiseGain { lin: gain.exp * v[var] + gain.rest, ..Default::default() }
        } else {
            gain
        }
    }
}

impl TermScales for BoseHubbard {
    fn term_ratios(&self, mags: &[f64], dt: f64) -> Vec<TermRatio> {
        let p = &self.params;
        let m = p.modes;
        let s = self.order.s();
        let u = p.interaction.abs();
        let sq = libm::sqrt(dt);
        let per = |num: f64, den: f64| if num == 0.0 { 0.0 } else if den > 0.0 { num / den } else { f64::INFINITY };
        let mut out = vec![
            TermRatio { term: "decay", ratio: 0.5 * p.decay * dt },
            TermRatio { term: "interaction noise", ratio: libm::sqrt(s.abs() * u) * sq },
            TermRatio { term: "ordering correction", ratio: 0.5 * s.abs() * u * dt },
        ];
        for j in 0..m {
            let (ma, mb) = (mags[j], mags[m + j]);
            let here = ma.max(mb);
            let hop: f64 = self.links.iter().filter(|l| l.0 == j).map(|l| l.2.norm() * mags[l.1].max(mags[m + l.1])).sum();
            out.push(TermRatio { term: "detuning", ratio: p.hsp(j, j).norm() * dt });
            out.push(TermRatio { term: "interaction", ratio: u * (ma * mb + (1.0 - s)) * dt });
            out.push(TermRatio { term: "hopping", ratio: per(hop * dt, here) });
            out.push(TermRatio { term: "drive", ratio: per(p.drive[j].norm() * dt, here) });
            out.push(TermRatio { term: "bath noise", ratio: per(self.bath_amplitude * sq, here) });
        }
        out
    }
}

/// Eigenvalues `(lambda+, lambda-) = gamma nbar / 2 +- U |alpha|^2 / 2` of the single-phase-space diffusion matrix.
pub fn gsp_diffusion_eigenvalues(alpha: C64, params: &ModelParams) -> (f64, f64) {
    let base = 0.5 * params.decay * params.thermal_occupation;
    let r = 0.5 * params.interaction.abs() * alpha.norm_sqr();
    (base + r, base - r)
}

/// Colours two unit white noises with the (clamped) diffusion matrix of mode amplitude `alpha`.
///
/// Returns the complex rate `(B xi)_re + i (B xi)_im` and whether an eigenvalue was clamped.
pub fn gsp_step_noise(alpha: C64, params: &ModelParams, white: [f64; 2]) -> (C64, bool) {
    let base = 0.5 * params.decay * params.thermal_occupation;
    let sq = alpha * alpha;
    let half_u = 0.5 * params.interaction;
    let (d_rr, d_ii, d_ri) = (half_u * sq.im + base, -half_u * sq.im + base, -half_u * sq.re);
    let theta = 0.5 * libm::atan2(2.0 * d_ri, d_rr - d_ii);
    let (sin, cos) = libm::sincos(theta);
    let mean = 0.5 * (d_rr + d_ii);
    let radius = libm::hypot(0.5 * (d_rr - d_ii), d_ri);
    let (plus, minus) = (mean + radius, mean - radius);
    let clamped = minus < 0.0;
    let (sp, sm) = (libm::sqrt(plus.max(0.0)), libm::sqrt(minus.max(0.0)));
    let re = sp * cos * white[0] - sm * sin * white[1];
    let im = sp * sin * white[0] + sm * cos * white[1];
    (C64::new(re, im), clamped)
}

/// Single-phase-space (Glauber-Sudarshan) evolution with `beta = conj(alpha)`.
///
/// The diffusion is built from the start-of-step amplitude; negative eigenvalues are clamped to zero.
#[derive(Debug, Clone)]
pub struct ClassicalP {
    params: ModelParams,
    links: Vec<(usize, usize, C64)>,
}

impl ClassicalP {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(ClassicalP { links: params.links(), params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl SdeModel for ClassicalP {
    fn dim(&self) -> usize {
        2 * self.params.modes
    }

    fn noise_count(&self) -> usize {
        2 * self.params.modes
    }

    fn condition_noise(&self, v0: &[C64], _t: f64, noise: &mut [f64]) -> u32 {
        let mut clamps = 0;
        for j in 0..self.params.modes {
            let (w, clamped) = gsp_step_noise(v0[j], &self.params, [noise[2 * j], noise[2 * j + 1]]);
            noise[2 * j] = w.re;
            noise[2 * j + 1] = w.im;
            clamps += clamped as u32;
        }
        clamps
    }

    fn split(&self, v: &[C64], _t: f64, noise: &[f64], out: &mut [Split]) {
        let p = &self.params;
        let m = p.modes;
        for j in 0..m {
            let a = v[j];
            out[j] = Split {
                exp: -I * p.interaction * a.norm_sqr() - 0.5 * p.decay - I * p.hsp(j, j),
                rest: -I * p.drive[j] + C64::new(noise[2 * j], noise[2 * j + 1]),
                lin: C64::new(0.0, 0.0),
            };
        }
        for &(j, k, h) in &self.links {
            out[j].rest -= I * h * v[k];
        }
        for j in 0..m {
            out[m + j] = Split { exp: out[j].exp.conj(), rest: out[j].rest.conj(), lin: C64::new(0.0, 0.0) };
        }
    }

    fn finish_step(&self, v: &mut [C64]) {
        let m = self.params.modes;
        for j in 0..m {
            v[m + j] = v[j].conj();
        }
    }
}
