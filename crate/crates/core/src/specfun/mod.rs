//! Special-function layer: the generalized multiquadric, its generalized
//! Fourier transform and the structure of that transform near the origin.

mod asymptotic;
mod expansion;
mod oracle;
mod poles;
mod series;

pub use asymptotic::{asymptotic_leading, LeadingCase, LeadingTerm};
pub use expansion::{eval_expansion, expansion_at_zero, ExpansionTerm};
pub use oracle::{phi_hat_oracle, OracleResult};
pub use poles::{enumerate_poles, Pole, PoleFamily};
pub use series::{phi_hat, phi_hat_series, SERIES_GUARD};

use serde::{Deserialize, Serialize};

use crate::error::{GmqError, Result};

/// Parameters of φ(r) = √(c^{2d} + r^{2d}) in ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbfParams {
    pub c: f64,
    pub d: u32,
    pub n: u32,
}

impl RbfParams {
    pub fn new(c: f64, d: u32, n: u32) -> Result<Self> {
        let p = Self { c, d, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(GmqError::invalid(format!(
                "shape parameter c must be finite and nonnegative, got {}",
                self.c
            )));
        }
        if self.d == 0 {
            return Err(GmqError::invalid("exponent d must be at least 1"));
        }
        if self.n == 0 {
            return Err(GmqError::invalid("dimension n must be at least 1"));
        }
        if self.d > 64 || self.n > 64 {
            return Err(GmqError::invalid("d and n are limited to 64"));
        }
        Ok(())
    }

    /// Rejects parameters outside the odd-n, odd-d regime.
    pub fn require_odd_odd(&self) -> Result<()> {
        self.validate()?;
        if self.n % 2 == 0 || self.d % 2 == 0 {
            return Err(GmqError::domain(format!(
                "this operation needs odd n and odd d (got n = {}, d = {}); \
                 the moment construction relies on the logarithmic term of the \
                 transform, which only exists in that regime",
                self.n, self.d
            )));
        }
        Ok(())
    }

    /// φ(r) for r ≥ 0, computed without overflow for large r.
    pub fn phi(&self, r: f64) -> f64 {
        let r = r.abs();
        let d = self.d as i32;
        if self.c == 0.0 {
            return r.powi(d);
        }
        if r <= self.c {
            self.c.powi(d) * (1.0 + (r / self.c).powi(2 * d)).sqrt()
        } else {
            r.powi(d) * (1.0 + (self.c / r).powi(2 * d)).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(RbfParams::new(-1.0, 1, 1).is_err());
        assert!(RbfParams::new(1.0, 0, 1).is_err());
        assert!(RbfParams::new(1.0, 1, 0).is_err());
        assert!(RbfParams::new(f64::NAN, 1, 1).is_err());
        let p = RbfParams::new(1.0, 2, 3).unwrap();
        assert!(p.require_odd_odd().is_err());
        assert!(RbfParams::new(1.0, 3, 2).unwrap().require_odd_odd().is_err());
        assert!(RbfParams::new(1.0, 3, 3).unwrap().require_odd_odd().is_ok());
    }

    #[test]
    fn phi_values() {
        let p = RbfParams::new(1.0, 1, 1).unwrap();
        assert!((p.phi(1.0) - 2f64.sqrt()).abs() < 1e-15);
        let p = RbfParams::new(0.0, 3, 1).unwrap();
        assert_eq!(p.phi(2.0), 8.0);
        let p = RbfParams::new(2.0, 3, 1).unwrap();
        assert!((p.phi(1e100) / 1e300 - 1.0).abs() < 1e-15);
    }
}
