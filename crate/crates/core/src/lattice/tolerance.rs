use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Comparison slacks.
///
/// `eps_price` guards price inequalities (monotonicity, subadditivity,
/// domination), `eps_tie` decides when two utilities are equal, and
/// `eps_report` is the slack allowed when asserting an inequality on a
/// reported quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig<T> {
    pub eps_price: T,
    pub eps_tie: T,
    pub eps_report: T,
}

impl<T: Scalar> Default for ToleranceConfig<T> {
    fn default() -> Self {
        let eps = T::default_eps();
        Self {
            eps_price: eps,
            eps_tie: eps,
            eps_report: T::of(1e-6).max(eps * T::of(10.0)),
        }
    }
}

impl<T: Scalar> ToleranceConfig<T> {
    pub fn new(eps_price: T, eps_tie: T, eps_report: T) -> Result<Self> {
        for (what, v) in [
            ("eps_price", eps_price),
            ("eps_tie", eps_tie),
            ("eps_report", eps_report),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidValue {
                    what,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            eps_price,
            eps_tie,
            eps_report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let t = ToleranceConfig::<f64>::default();
        assert_eq!(t.eps_price, 1e-9);
        assert_eq!(t.eps_tie, 1e-9);
        assert_eq!(t.eps_report, 1e-6);
        assert!(ToleranceConfig::new(0.0, 1e-9, 1e-6).is_err());
    }
}
