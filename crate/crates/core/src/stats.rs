//! Sub-ensemble averaging.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;
use crate::error::{Error, Result};

/// Mean with separate sampling errors on the real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    pub err_re: f64,
    pub err_im: f64,
    /// Trajectories that entered the average.
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: C64) -> Self {
        Estimate { value, err_re: 0.0, err_im: 0.0, samples: 0 }
    }

    /// Absolute deviation from `target` in units of the real-part error, floored to avoid 0/0.
    pub fn sigma_re(&self, target: f64, floor: f64) -> f64 {
        (self.value.re - target).abs() / self.err_re.max(floor)
    }

    pub fn sigma_im(&self, target: f64, floor: f64) -> f64 {
        (self.value.im - target).abs() / self.err_im.max(floor)
    }
}

/// Per-block sums for `u` contiguous index blocks.
#[derive(Debug, Clone)]
pub struct BlockAccumulator {
    block_len: usize,
    sums: Vec<C64>,
    counts: Vec<usize>,
}

impl BlockAccumulator {
    pub fn new(size: usize, blocks: usize) -> Result<Self> {
        if blocks < 2 || size % blocks != 0 {
            return Err(Error::InvalidParameter("sub-ensemble count must be >= 2 and divide the ensemble size"));
        }
        Ok(BlockAccumulator { block_len: size / blocks, sums: vec![C64::new(0.0, 0.0); blocks], counts: vec![0; blocks] })
    }

    pub fn push(&mut self, index: usize, value: C64) {
        let b = index / self.block_len;
        self.sums[b] += value;
        self.counts[b] += 1;
    }

    pub fn block_means(&self) -> Vec<Option<C64>> {
        self.sums.iter().zip(&self.counts).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect()
    }

    pub fn finish(&self) -> Result<Estimate> {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidParameter("every trajectory excluded from the average"));
        }
        let mean = self.sums.iter().fold(C64::new(0.0, 0.0), |a, s| a + s) / total as f64;
        let means: Vec<C64> = self.block_means().into_iter().flatten().collect();
        let (err_re, err_im) = block_error(&means);
        Ok(Estimate { value: mean, err_re, err_im, samples: total })
    }
}

/// `sqrt(var / (u - 1))` of the block means, with the population variance over `u` blocks.
pub fn block_error(means: &[C64]) -> (f64, f64) {
    let u = means.len();
    if u < 2 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let n = u as f64;
    let m = means.iter().fold(C64::new(0.0, 0.0), |a, x| a + x) / n;
    let (mut vr, mut vi) = (0.0, 0.0);
    for x in means {
        vr += (x.re - m.re) * (x.re - m.re);
        vi += (x.im - m.im) * (x.im - m.im);
    }
    (libm::sqrt(vr / n / (n - 1.0)), libm::sqrt(vi / n / (n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_formula_matches_hand_value() {
        // means 1, 2, 3, 4: population variance 1.25, error sqrt(1.25/3)
        let means = [1.0, 2.0, 3.0, 4.0].map(|x| C64::new(x, 0.0));
        let (er, ei) = block_error(&means);
        assert!((er - libm::sqrt(1.25 / 3.0)).abs() < 1e-15);
        assert_eq!(ei, 0.0);
    }

    #[test]
    fn accumulator_blocks() {
        let mut acc = BlockAccumulator::new(8, 4).unwrap();
        for i in 0..8 {
            acc.push(i, C64::new(i as f64, 1.0));
        }
        let e = acc.finish().unwrap();
        assert!((e.value.re - 3.5).abs() < 1e-15);
        assert_eq!(e.value.im, 1.0);
        // block means 0.5, 2.5, 4.5, 6.5
        assert!((e.err_re - libm::sqrt(5.0 / 3.0)).abs() < 1e-14);
        assert!(BlockAccumulator::new(9, 4).is_err());
    }
}
