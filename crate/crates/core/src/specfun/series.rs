//! Residue-series evaluation of φ̂.
//!
//! φ̂(s) = 2^{n−1} π^{(n−1)/2} c^d s^{−n} Σ_p Res_{t=p} F(t) x^t,
//! F(t) = Γ(t) Γ(−1/2−t) Γ(n/2−dt) / Γ(dt),  x = (cs/2)^{2d},
//! summed over the poles returned by `enumerate_poles`. Every term is
//! carried in double-double because the series alternates with terms far
//! larger than its sum once cs is of order ten.

use num_rational::Rational64;

use super::{enumerate_poles, oracle::phi_hat_oracle, RbfParams};
use crate::dd::DoubleDouble as DD;
use crate::error::{GmqError, Result};
use crate::gamma::{digamma_dd, digamma_int_dd, ln_factorial_dd, ln_gamma_dd};

/// Largest c·s for which the residue series is used.
pub const SERIES_GUARD: f64 = 20.0;

const STOP_REL: f64 = 1e-20;
const STOP_ABS_REL_PEAK: f64 = 1e-32;
const STOP_RUN: usize = 3;

/// Laurent data of F(t) around a pole p: F(p+ε) x^{p+ε} ≈ K ε^{−k} x^p (1 + (l0 + ln x) ε).
#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalExpansion {
    pub ln_k: DD,
    pub sign: f64,
    pub order: i32,
    pub l0: DD,
}

/// One factor Γ(a + b t)^e of the integrand.
struct Factor {
    a: Rational64,
    b: i64,
    e: i32,
}

fn factors(params: &RbfParams) -> [Factor; 4] {
    let n = params.n as i64;
    let d = params.d as i64;
    [
        Factor { a: Rational64::from_integer(0), b: 1, e: 1 },
        Factor { a: Rational64::new(-1, 2), b: -1, e: 1 },
        Factor { a: Rational64::new(n, 2), b: -d, e: 1 },
        Factor { a: Rational64::from_integer(0), b: d, e: -1 },
    ]
}

pub(crate) fn local_expansion(params: &RbfParams, p: Rational64) -> LocalExpansion {
    let mut ln_k = DD::ZERO;
    let mut sign = 1.0;
    let mut order = 0;
    let mut l0 = DD::ZERO;
    for f in factors(params) {
        let z0 = f.a + Rational64::from_integer(f.b) * p;
        let b = DD::from_i64(f.b);
        let sb = f.b.signum() as f64;
        if z0.is_integer() && z0.to_integer() <= 0 {
            // Γ(−m + bε) ≈ (−1)^m / (m! b ε) · (1 + b ε ψ(m+1))
            let m = (-z0.to_integer()) as u64;
            let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
            let lf = ln_factorial_dd(m) + DD::from_i64(f.b.abs()).ln();
            let psi = digamma_int_dd(m);
            sign *= parity * sb;
            if f.e > 0 {
                ln_k = ln_k - lf;
                l0 = l0 + b * psi;
                order += 1;
            } else {
                ln_k = ln_k + lf;
                l0 = l0 - b * psi;
                order -= 1;
            }
        } else {
            let z = DD::from_ratio(*z0.numer(), *z0.denom());
            let (lg, sg) = ln_gamma_dd(z);
            let psi = digamma_dd(z);
            sign *= sg;
            if f.e > 0 {
                ln_k = ln_k + lg;
                l0 = l0 + b * psi;
            } else {
                ln_k = ln_k - lg;
                l0 = l0 - b * psi;
            }
        }
    }
    LocalExpansion { ln_k, sign, order, l0 }
}

/// ln of 2^{n−1} π^{(n−1)/2}.
pub(crate) fn ln_prefactor(params: &RbfParams) -> DD {
    let nm1 = DD::from_i64(params.n as i64 - 1);
    nm1 * DD::LN2 + nm1 * DD::PI.ln().mul_f64(0.5)
}

fn rational_dd(t: Rational64) -> DD {
    DD::from_ratio(*t.numer(), *t.denom())
}

pub fn phi_hat_series(params: &RbfParams, s: f64) -> Result<f64> {
    params.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(GmqError::domain(format!("s must be positive and finite, got {s}")));
    }
    if params.c <= 0.0 {
        return Err(GmqError::domain(
            "the residue series needs c > 0; c = 0 is handled by phi_hat as a pure power",
        ));
    }
    let cs = params.c * s;
    if cs > SERIES_GUARD {
        return Err(GmqError::domain(format!(
            "c·s = {cs} exceeds the series guard {SERIES_GUARD}"
        )));
    }
    let d = params.d as i64;
    let ln_x = DD::from_f64(cs * 0.5).ln().mul_f64(2.0 * d as f64);
    let ln_front = ln_prefactor(params)
        + DD::from_f64(params.c).ln().mul_f64(d as f64)
        - DD::from_f64(s).ln().mul_f64(params.n as f64);

    let t_cap = 40.0 + 4.0 * cs;
    let poles = enumerate_poles(params, t_cap)?;
    let mut sum = DD::ZERO;
    let mut peak = 0.0f64;
    let mut run = 0;
    let mut last = 0.0;
    for pole in &poles {
        if pole.order == 0 {
            continue;
        }
        let p = pole.location;
        let le = local_expansion(params, p);
        debug_assert_eq!(le.order, pole.order as i32);
        let mag = (ln_front + le.ln_k + rational_dd(p) * ln_x).exp();
        let mut term = mag.mul_f64(le.sign);
        if le.order == 2 {
            term = term * (le.l0 + ln_x);
        }
        sum = sum + term;
        last = term.to_f64();
        peak = peak.max(last.abs());
        let small = last.abs() <= STOP_REL * sum.to_f64().abs() + STOP_ABS_REL_PEAK * peak;
        run = if small && pole.location_f64() > 1.0 { run + 1 } else { 0 };
        if run >= STOP_RUN {
            return Ok(sum.to_f64());
        }
    }
    Err(GmqError::NumericalFailure {
        message: format!("residue series did not converge below t = {t_cap}"),
        partial_sum: Some(sum.to_f64()),
        last_term: Some(last),
        table: Vec::new(),
    })
}

/// Coefficients (power, log) of the contribution of the pole at `p` to φ̂:
/// power · s^{−n+2dp} + log · s^{−n+2dp} log(cs). Zero for cancelled poles.
pub(crate) fn pole_coefficients(params: &RbfParams, p: Rational64) -> (f64, f64) {
    let le = local_expansion(params, p);
    if le.order <= 0 {
        return (0.0, 0.0);
    }
    let d = params.d as f64;
    // c^d (c/2)^{2dp}
    let c_pow = d + 2.0 * d * rational_dd(p).to_f64();
    let ln_scale = if params.c > 0.0 {
        DD::from_f64(params.c).ln().mul_f64(d)
            + rational_dd(p) * DD::from_f64(0.5 * params.c).ln().mul_f64(2.0 * d)
    } else if c_pow == 0.0 {
        DD::LN2.mul_f64(d)
    } else {
        return (0.0, 0.0);
    };
    let base = (ln_prefactor(params) + le.ln_k + ln_scale).exp().mul_f64(le.sign);
    if le.order == 1 {
        (base.to_f64(), 0.0)
    } else {
        let power = base * (le.l0 - DD::LN2.mul_f64(2.0 * d));
        (power.to_f64(), base.mul_f64(2.0 * d).to_f64())
    }
}

/// Coefficient A of the pure power φ̂(s) = A s^{−n−d} for c = 0 (zero for even d).
pub(crate) fn power_law_coefficient(params: &RbfParams) -> f64 {
    let zero_shape = RbfParams { c: 0.0, ..*params };
    pole_coefficients(&zero_shape, Rational64::new(-1, 2)).0
}

/// φ̂(s) on the whole half-line: residue series inside the guard, the
/// quadrature oracle beyond it (n ∈ {1, 3}), and the exact power law for c = 0.
pub fn phi_hat(params: &RbfParams, s: f64) -> Result<f64> {
    params.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(GmqError::domain(format!("s must be positive and finite, got {s}")));
    }
    if params.c == 0.0 {
        let e = -((params.n + params.d) as i32);
        return Ok(power_law_coefficient(params) * s.powi(e));
    }
    if params.c * s <= SERIES_GUARD {
        return phi_hat_series(params, s);
    }
    if params.n == 1 || params.n == 3 {
        return Ok(phi_hat_oracle(params, s, 1e-6)?.value);
    }
    Err(GmqError::domain(format!(
        "c·s = {} is beyond the series guard and no oracle exists for n = {}",
        params.c * s,
        params.n
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: f64, d: u32, n: u32) -> RbfParams {
        RbfParams::new(c, d, n).unwrap()
    }

    #[test]
    fn multiquadric_at_one() {
        let v = phi_hat_series(&p(1.0, 1, 1), 1.0).unwrap();
        assert!((v + 1.2038144603944692).abs() < 1e-14, "{v}");
    }

    #[test]
    fn reference_values() {
        let v = phi_hat_series(&p(1.0, 3, 1), 0.5).unwrap();
        assert!((v / 193.8507295867654 - 1.0).abs() < 1e-12, "{v}");
        let v = phi_hat_series(&p(1.0, 3, 3), 0.5).unwrap();
        assert!((v / 19311.539778356244 - 1.0).abs() < 1e-12, "{v}");
        let v = phi_hat_series(&p(1.0, 1, 3), 1.0).unwrap();
        assert!((v / -20.41832778887682 - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn power_law_for_zero_shape() {
        assert!((phi_hat(&p(0.0, 1, 1), 2.0).unwrap() + 0.5).abs() < 1e-15);
        let v = phi_hat(&p(0.0, 1, 3), 1.0).unwrap();
        assert!((v + 8.0 * std::f64::consts::PI).abs() < 1e-13);
        assert_eq!(phi_hat(&p(0.0, 2, 3), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn guard_and_domain() {
        assert!(phi_hat_series(&p(1.0, 1, 1), 25.0).is_err());
        assert!(phi_hat_series(&p(0.0, 1, 1), 1.0).is_err());
        assert!(phi_hat_series(&p(1.0, 1, 1), -1.0).is_err());
    }
}
