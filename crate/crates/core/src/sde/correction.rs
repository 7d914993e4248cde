use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Coefficient of real noise `sigma` in the rate of one variable, split like the drift:
/// `(exp * v + rest + lin) * xi_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseGain {
    pub exp: C64,
    pub rest: C64,
    pub lin: C64,
}

impl NoiseGain {
    fn total(&self, v: C64) -> C64 {
        self.exp * v + self.rest + self.lin
    }
}

/// Noise coefficients of a model, assumed holomorphic in the doubled variables.
pub trait NoiseStructure {
    fn dim(&self) -> usize;
    fn noise_count(&self) -> usize;
    fn gain(&self, v: &[C64], t: f64, var: usize, sigma: usize) -> NoiseGain;
}

/// Drift to add so that the split midpoint scheme reproduces the Ito equation.
///
/// With `iterations >= 1`: `-1/2 sum_s sum_k db_js/dv_k b_ks + 1/2 sum_s exp_js lin_js`.
/// With `iterations == 0`: `-1/2 sum_s (exp_js^2 v_j + exp_js rest_js)`.
pub fn weak_correction<N: NoiseStructure + ?Sized>(model: &N, v: &[C64], t: f64, iterations: u32) -> Vec<C64> {
    let dim = model.dim();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    if iterations == 0 {
        for (j, c) in out.iter_mut().enumerate() {
            for s in 0..model.noise_count() {
                let g = model.gain(v, t, j, s);
                *c -= 0.5 * (g.exp * g.exp * v[j] + g.exp * g.rest);
            }
        }
        return out;
    }
    let mut shifted = v.to_vec();
    for s in 0..model.noise_count() {
        let totals: Vec<C64> = (0..dim).map(|k| model.gain(v, t, k, s).total(v[k])).collect();
        for k in 0..dim {
            if totals[k] == C64::new(0.0, 0.0) {
                continue;
            }
            let h = 1e-6 * v[k].norm().max(1.0);
            shifted[k] = v[k] + h;
            let plus: Vec<C64> = (0..dim).map(|j| model.gain(&shifted, t, j, s).total(shifted[j])).collect();
            shifted[k] = v[k] - h;
            let minus: Vec<C64> = (0..dim).map(|j| model.gain(&shifted, t, j, s).total(shifted[j])).collect();
            shifted[k] = v[k];
            for j in 0..dim {
                out[j] -= 0.5 * (plus[j] - minus[j]) / (2.0 * h) * totals[k];
            }
        }
        for (j, c) in out.iter_mut().enumerate() {
            let g = model.gain(v, t, j, s);
            *c += 0.5 * g.exp * g.lin;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Geometric noise `dv = c v dW`, written through the linear slot or the exponential slot.
    struct Geometric {
        c: C64,
        via_exp: bool,
    }

    impl NoiseStructure for Geometric {
        fn dim(&self) -> usize {
            1
        }
        fn noise_count(&self) -> usize {
            1
        }
        fn gain(&self, v: &[C64], _t: f64, _j: usize, _s: usize) -> NoiseGain {
            if self.via_exp {
                NoiseGain { exp: self.c, ..Default::default() }
            } else {
                NoiseGain { lin: self.c * v[0], ..Default::default() }
            }
        }
    }

    #[test]
    fn stratonovich_shift_for_geometric_noise() {
        let c = C64::new(0.3, -0.7);
        let v = [C64::new(1.2, 0.4)];
        let want = -0.5 * c * c * v[0];
        for via_exp in [true, false] {
            let m = Geometric { c, via_exp };
            let got = weak_correction(&m, &v, 0.0, 1)[0];
            assert!((got - want).norm() < 1e-8, "{via_exp}: {got} vs {want}");
        }
        let zero_iter = weak_correction(&Geometric { c, via_exp: true }, &v, 0.0, 0)[0];
        assert!((zero_iter - want).norm() < 1e-14);
    }
}
