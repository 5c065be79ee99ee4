//! Laurent–logarithmic expansion of φ̂ at the origin.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::series::pole_coefficients;
use super::{enumerate_poles, RbfParams};
use crate::error::{GmqError, Result};

/// coefficient · s^exponent, times log(cs) when `log_flag` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub exponent: Rational64,
    pub coefficient: f64,
    pub log_flag: bool,
}

impl ExpansionTerm {
    pub fn exponent_f64(&self) -> f64 {
        *self.exponent.numer() as f64 / *self.exponent.denom() as f64
    }

    pub fn eval(&self, c: f64, s: f64) -> f64 {
        let v = self.coefficient * s.powf(self.exponent_f64());
        if self.log_flag {
            v * (c * s).ln()
        } else {
            v
        }
    }
}

pub fn eval_expansion(terms: &[ExpansionTerm], c: f64, s: f64) -> f64 {
    terms.iter().map(|t| t.eval(c, s)).sum()
}

/// All terms with exponent ≤ `max_order`, one residue per pole.
pub fn expansion_at_zero(params: &RbfParams, max_order: i64) -> Result<Vec<ExpansionTerm>> {
    params.validate()?;
    if params.n % 2 == 1 && params.d % 2 == 0 {
        return Err(GmqError::domain(format!(
            "expansion_at_zero covers odd n with odd d, or even n; got n = {}, d = {}",
            params.n, params.d
        )));
    }
    let n = params.n as i64;
    let d = params.d as i64;
    // exponent −n + 2dp ≤ max_order  ⇔  p ≤ (max_order + n) / (2d)
    let p_max = Rational64::new(max_order + n, 2 * d);
    let t_max = (*p_max.numer() as f64 / *p_max.denom() as f64).max(0.5);
    let mut terms = Vec::new();
    for pole in enumerate_poles(params, t_max)? {
        if pole.order == 0 || pole.location > p_max {
            continue;
        }
        let exponent = Rational64::from_integer(-n) + Rational64::from_integer(2 * d) * pole.location;
        let (power, log) = pole_coefficients(params, pole.location);
        if power != 0.0 {
            terms.push(ExpansionTerm { exponent, coefficient: power, log_flag: false });
        }
        if pole.order == 2 && log != 0.0 {
            terms.push(ExpansionTerm { exponent, coefficient: log, log_flag: true });
        }
    }
    terms.sort_by_key(|t| (t.exponent, t.log_flag));
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: u32, d: u32, max_order: i64) -> Vec<(i64, bool)> {
        let p = RbfParams::new(1.0, d, n).unwrap();
        expansion_at_zero(&p, max_order)
            .unwrap()
            .iter()
            .map(|t| {
                assert!(t.exponent.is_integer());
                (t.exponent.to_integer(), t.log_flag)
            })
            .collect()
    }

    #[test]
    fn structure_n1_d3() {
        assert_eq!(shape(1, 3, 2), vec![(-4, false), (0, false), (2, false), (2, true)]);
    }

    #[test]
    fn structure_n1_d1() {
        assert_eq!(shape(1, 1, 0), vec![(-2, false), (0, false), (0, true)]);
    }

    #[test]
    fn multiquadric_coefficients() {
        // −(2/s)K₁(s) = −2/s² + (ln 2 − γ + 1/2) − log s + O(s² log s)
        let p = RbfParams::new(1.0, 1, 1).unwrap();
        let t = expansion_at_zero(&p, 0).unwrap();
        assert!((t[0].coefficient + 2.0).abs() < 1e-15);
        assert!((t[2].coefficient + 1.0).abs() < 1e-15);
        let expect = std::f64::consts::LN_2 - 0.5772156649015329 + 0.5;
        assert!((t[1].coefficient - expect).abs() < 1e-15);
    }

    #[test]
    fn odd_n_even_d_rejected() {
        assert!(expansion_at_zero(&RbfParams::new(1.0, 2, 3).unwrap(), 2).is_err());
        assert!(expansion_at_zero(&RbfParams::new(1.0, 2, 2).unwrap(), 2).is_ok());
    }
}
