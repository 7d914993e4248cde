use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Ladder operator kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Annihilate,
    Create,
}

/// One factor of an operator product: the operator, its mode and an ordinal time label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorFactor {
    pub op: Ladder,
    pub mode: usize,
    /// Rank of the factor's time among the distinct times of the product (0 = earliest).
    pub time: usize,
}

impl OperatorFactor {
    pub fn annihilate(mode: usize, time: usize) -> Self {
        OperatorFactor { op: Ladder::Annihilate, mode, time }
    }

    pub fn create(mode: usize, time: usize) -> Self {
        OperatorFactor { op: Ladder::Create, mode, time }
    }
}

impl fmt::Display for OperatorFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Ladder::Annihilate => "a",
            Ladder::Create => "a+",
        };
        write!(f, "{op}_{}(t{})", self.mode + 1, self.time)
    }
}

/// Operator product in written order; time labels must cover `0..time_count` without gaps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorrelationSpec {
    factors: Vec<OperatorFactor>,
    time_count: usize,
}

impl CorrelationSpec {
    pub fn new(factors: Vec<OperatorFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("correlation needs at least one operator"));
        }
        let time_count = factors.iter().map(|f| f.time).max().unwrap_or(0) + 1;
        if (0..time_count).any(|t| factors.iter().all(|f| f.time != t)) {
            return Err(Error::InvalidParameter("time labels must be consecutive from 0"));
        }
        Ok(CorrelationSpec { factors, time_count })
    }

    pub fn factors(&self) -> &[OperatorFactor] {
        &self.factors
    }

    pub fn time_count(&self) -> usize {
        self.time_count
    }

    pub fn max_mode(&self) -> usize {
        self.factors.iter().map(|f| f.mode).max().unwrap_or(0)
    }

    /// Times increase inward from both ends: no strict local minimum in the time sequence.
    pub fn is_time_ordered(&self) -> bool {
        time_ordered(&self.factors)
    }

    /// `<X>^* = <X^dagger>`: reversed product with each operator daggered.
    pub fn adjoint(&self) -> Self {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|f| OperatorFactor {
                op: match f.op {
                    Ladder::Annihilate => Ladder::Create,
                    Ladder::Create => Ladder::Annihilate,
                },
                ..*f
            })
            .collect();
        CorrelationSpec { factors, time_count: self.time_count }
    }
}

impl fmt::Display for CorrelationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, x) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(">")
    }
}

pub(crate) fn time_ordered(factors: &[OperatorFactor]) -> bool {
    let t: Vec<usize> = factors.iter().map(|f| f.time).collect();
    (0..=t.len()).any(|k| t[..k].windows(2).all(|w| w[0] <= w[1]) && t[k..].windows(2).all(|w| w[0] >= w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn time_order_detection() {
        let s = |ts: &[usize]| CorrelationSpec::new(ts.iter().map(|&t| OperatorFactor::create(0, t)).collect()).unwrap();
        assert!(s(&[0, 1, 1, 0]).is_time_ordered());
        assert!(s(&[0, 1, 2]).is_time_ordered());
        assert!(s(&[2, 1, 0]).is_time_ordered());
        assert!(!s(&[1, 0, 1]).is_time_ordered());
        assert!(!s(&[0, 2, 1, 2]).is_time_ordered());
        assert!(CorrelationSpec::new(vec![OperatorFactor::create(0, 1)]).is_err());
    }
}
