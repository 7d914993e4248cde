use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Product number basis `|n_0, .., n_{M-1}>` with `0 <= n_j <= cutoff`,
/// indexed as `sum_j n_j (cutoff + 1)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    modes: usize,
    cutoff: usize,
    strides: Vec<usize>,
    occupations: Vec<u16>,
}

impl FockBasis {
    pub const MAX_MODES: usize = 3;

    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 || modes > Self::MAX_MODES {
            return Err(Error::InvalidParameter("Fock oracle supports 1 to 3 modes"));
        }
        if cutoff == 0 {
            return Err(Error::InvalidParameter("Fock cutoff must be at least 1"));
        }
        let base = cutoff + 1;
        let strides: Vec<usize> = (0..modes).map(|j| base.pow(j as u32)).collect();
        let dim = base.pow(modes as u32);
        let mut occupations = Vec::with_capacity(dim * modes);
        for r in 0..dim {
            for j in 0..modes {
                occupations.push(((r / strides[j]) % base) as u16);
            }
        }
        Ok(FockBasis { modes, cutoff, strides, occupations })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        self.occupations[index * self.modes + mode] as usize
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Any mode at the cutoff.
    pub fn on_boundary(&self, index: usize) -> bool {
        (0..self.modes).any(|j| self.occupation(index, j) == self.cutoff)
    }
}
