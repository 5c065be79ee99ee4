//! Leading behaviour of φ̂(s) as s → 0⁺.

use num_rational::Rational64;
use serde::Serialize;

use super::series::pole_coefficients;
use super::RbfParams;
use crate::error::Result;
use crate::gamma::{gamma, ln_gamma_dd};
use crate::dd::DoubleDouble as DD;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadingCase {
    /// d odd: a pure power s^{−n−d}.
    DOddOrNoneven,
    /// d even, n < d: a constant.
    EvenNLtD,
    /// d even, n > d: s^{−n+d}.
    EvenNGtD,
    /// d even, n = d: a logarithm.
    EvenNEqD,
}

/// φ̂(s) ~ coefficient · s^exponent, or coefficient · log(cs) + constant
/// when `log_flag` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingTerm {
    pub case_tag: LeadingCase,
    pub exponent: Rational64,
    pub coefficient: f64,
    pub log_flag: bool,
    /// Constant accompanying the logarithm (log case only).
    pub constant: Option<f64>,
}

impl LeadingTerm {
    pub fn eval(&self, c: f64, s: f64) -> f64 {
        if self.log_flag {
            self.coefficient * (c * s).ln() + self.constant.unwrap_or(0.0)
        } else {
            let e = *self.exponent.numer() as f64 / *self.exponent.denom() as f64;
            self.coefficient * s.powf(e)
        }
    }
}

fn lgamma(x: f64) -> f64 {
    ln_gamma_dd(DD::from_f64(x)).0.to_f64()
}

/// Classifies the small-s behaviour and evaluates its coefficient.
///
/// Magnitudes come from the closed-form gamma expressions; signs (and the
/// constant of the log case) come from the residue at the governing pole,
/// which follows the regularized-integral convention.
pub fn asymptotic_leading(params: &RbfParams) -> Result<LeadingTerm> {
    params.validate()?;
    let n = params.n as f64;
    let d = params.d as f64;
    let c = params.c;
    let pi = std::f64::consts::PI;
    let ni = params.n as i64;
    let di = params.d as i64;

    if params.d % 2 == 1 {
        let mag = ((n + d) * std::f64::consts::LN_2 + 0.5 * n * pi.ln() + lgamma(0.5 * (n + d))
            - lgamma(-0.5 * d))
        .exp();
        let (res, _) = pole_coefficients(&RbfParams { c: 1.0, ..*params }, Rational64::new(-1, 2));
        return Ok(LeadingTerm {
            case_tag: LeadingCase::DOddOrNoneven,
            exponent: Rational64::from_integer(-ni - di),
            coefficient: mag.copysign(res),
            log_flag: false,
            constant: None,
        });
    }

    if params.n < params.d {
        let g = gamma(-0.5 - n / (2.0 * d))? * gamma(n / (2.0 * d))? / gamma(0.5 * n)?;
        let mag = (pi.powf(0.5 * (n - 1.0)) * c.powf(n + d) / (2.0 * d) * g).abs();
        let (res, _) = pole_coefficients(params, Rational64::new(ni, 2 * di));
        return Ok(LeadingTerm {
            case_tag: LeadingCase::EvenNLtD,
            exponent: Rational64::from_integer(0),
            coefficient: mag.copysign(res),
            log_flag: false,
            constant: None,
        });
    }

    if params.n > params.d {
        let g = gamma(0.5)? * gamma(0.5 * (n - d))? / gamma(0.5 * d)?;
        let mag = (2f64.powf(n - 1.0 - d) * pi.powf(0.5 * (n - 1.0)) * c.powf(2.0 * d) * g).abs();
        let (res, _) = pole_coefficients(params, Rational64::new(1, 2));
        return Ok(LeadingTerm {
            case_tag: LeadingCase::EvenNGtD,
            exponent: Rational64::new(di - ni, 1),
            coefficient: mag.copysign(res),
            log_flag: false,
            constant: None,
        });
    }

    let mag = pi.powf(0.5 * n) * c.powf(n + d) / gamma(0.5 * n)?;
    let (constant, log_coef) = pole_coefficients(params, Rational64::new(1, 2));
    Ok(LeadingTerm {
        case_tag: LeadingCase::EvenNEqD,
        exponent: Rational64::from_integer(0),
        coefficient: mag.copysign(log_coef),
        log_flag: true,
        constant: Some(constant),
    })
}
