//! Operator-ordering labels for phase-space samples.

use core::fmt;

use crate::error::{Error, Result};

/// Ordering parameter of a doubled phase-space representation.
///
/// `s = 1` is positive-P (normal order), `s = 0` doubled-Wigner (symmetric),
/// `s = -1` doubled-Q (anti-normal). The classical flag marks the
/// Glauber-Sudarshan restriction `beta = conj(alpha)`, which is only meaningful at `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SOrder {
    s: f64,
    classical: bool,
}

impl SOrder {
    pub const POSITIVE_P: SOrder = SOrder { s: 1.0, classical: false };
    pub const DOUBLED_WIGNER: SOrder = SOrder { s: 0.0, classical: false };
    pub const DOUBLED_Q: SOrder = SOrder { s: -1.0, classical: false };
    pub const CLASSICAL_P: SOrder = SOrder { s: 1.0, classical: true };

    pub fn new(s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) || !s.is_finite() {
            return Err(Error::InvalidOrder(s));
        }
        Ok(SOrder { s, classical: false })
    }

    pub fn s(self) -> f64 {
        self.s
    }

    pub fn is_classical(self) -> bool {
        self.classical
    }

    /// Positive-P or classical-P: samples estimate normally ordered moments.
    pub fn is_normal(self) -> bool {
        self.s == 1.0
    }

    pub fn is_antinormal(self) -> bool {
        self.s == -1.0
    }

    /// Same ordering parameter, ignoring the classical flag.
    pub fn same_order(self, other: SOrder) -> bool {
        self.s == other.s
    }

    /// Mean of `alpha * beta` in vacuum, `(1 - s) / 2`.
    pub fn vacuum_offset(self) -> f64 {
        0.5 * (1.0 - self.s)
    }
}

impl fmt::Display for SOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.s, self.classical) {
            (_, true) => f.write_str("classical-P"),
            (s, _) if s == 1.0 => f.write_str("positive-P"),
            (s, _) if s == 0.0 => f.write_str("doubled-Wigner"),
            (s, _) if s == -1.0 => f.write_str("doubled-Q"),
            (s, _) => write!(f, "s={s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_checked() {
        assert!(SOrder::new(1.5).is_err());
        assert!(SOrder::new(f64::NAN).is_err());
        assert_eq!(SOrder::new(-1.0).unwrap(), SOrder::DOUBLED_Q);
    }

    #[test]
    fn vacuum_offsets() {
        assert_eq!(SOrder::POSITIVE_P.vacuum_offset(), 0.0);
        assert_eq!(SOrder::DOUBLED_WIGNER.vacuum_offset(), 0.5);
        assert_eq!(SOrder::DOUBLED_Q.vacuum_offset(), 1.0);
    }
}
