//! Gamma, log-gamma and digamma on the real line.
//!
//! The kernels work in double-double so that the residue series can afford
//! heavy cancellation. Arguments below 1/2 go through the reflection formula;
//! the rest are shifted up to z ≥ 30 with Γ(x+1) = xΓ(x), where the Stirling
//! series with Bernoulli numbers B₂..B₃₀ is accurate to ~1e−37.

use crate::dd::DoubleDouble as DD;
use crate::error::{GmqError, Result};

const SHIFT: f64 = 30.0;

/// (numerator, denominator) of B_{2k}, k = 1..15.
const BERNOULLI: [(i64, i64); 15] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaKind {
    Gamma,
    LogAbsGamma,
    Digamma,
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Returns (ln|Γ(x)|, sign Γ(x)). `x` must not be a nonpositive integer.
pub fn ln_gamma_dd(x: DD) -> (DD, f64) {
    if x.hi < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        let s = sin_pi(x);
        let (lg, _) = ln_gamma_dd(DD::ONE - x);
        let sign = if s.hi < 0.0 { -1.0 } else { 1.0 };
        return (DD::PI.ln() - s.abs().ln() - lg, sign);
    }
    let mut z = x;
    let mut sign = 1.0;
    let mut log_prod = DD::ZERO;
    let mut prod = DD::ONE;
    while z.hi < SHIFT {
        prod = prod * z;
        z = z + DD::ONE;
        let p = prod.hi.abs();
        if !(1e-200..=1e200).contains(&p) {
            if prod.hi < 0.0 {
                sign = -sign;
            }
            log_prod = log_prod + prod.abs().ln();
            prod = DD::ONE;
        }
    }
    if prod.hi < 0.0 {
        sign = -sign;
    }
    log_prod = log_prod + prod.abs().ln();
    (stirling(z) - log_prod, sign)
}

/// Splits x = k + f with integer k and |f| ≤ 1/2.
fn reduce_half(x: DD) -> (i64, DD) {
    let k = x.hi.round();
    (k as i64, x - DD::from_f64(k))
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Taylor sums for sin θ and cos θ with |θ| ≤ π/2.
fn sin_cos_small(theta: DD) -> (DD, DD) {
    let t2 = theta.sqr();
    let mut sin = theta;
    let mut cos = DD::ONE;
    let mut ts = theta;
    let mut tc = DD::ONE;
    for j in 1..=20i64 {
        ts = -(ts * t2) / DD::from_i64((2 * j) * (2 * j + 1));
        tc = -(tc * t2) / DD::from_i64((2 * j - 1) * (2 * j));
        sin = sin + ts;
        cos = cos + tc;
    }
    (sin, cos)
}

pub fn sin_pi(x: DD) -> DD {
    let (k, f) = reduce_half(x);
    sin_cos_small(DD::PI * f).0.mul_f64(parity(k))
}

pub fn cos_pi(x: DD) -> DD {
    let (k, f) = reduce_half(x);
    sin_cos_small(DD::PI * f).1.mul_f64(parity(k))
}

fn stirling(z: DD) -> DD {
    let half = DD::from_f64(0.5);
    let mut acc = (z - half) * z.ln() - z + DD::HALF_LN_2PI;
    let zinv = z.recip();
    let zinv2 = zinv.sqr();
    let mut zpow = zinv;
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k2 = 2 * (k as i64 + 1);
        let coef = DD::from_ratio(num, den) / DD::from_i64(k2 * (k2 - 1));
        acc = acc + coef * zpow;
        zpow = zpow * zinv2;
    }
    acc
}

/// ψ(x) in double-double. `x` must not be a nonpositive integer.
pub fn digamma_dd(x: DD) -> DD {
    if x.hi < 0.5 {
        // ψ(1−x) − ψ(x) = π cot(πx)
        return digamma_dd(DD::ONE - x) - DD::PI * cos_pi(x) / sin_pi(x);
    }
    let mut z = x;
    let mut shift = DD::ZERO;
    while z.hi < SHIFT {
        shift = shift + z.recip();
        z = z + DD::ONE;
    }
    let zinv = z.recip();
    let zinv2 = zinv.sqr();
    let mut acc = z.ln() - zinv.mul_f64(0.5);
    let mut zpow = zinv2;
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k2 = 2 * (k as i64 + 1);
        acc = acc - DD::from_ratio(num, den) / DD::from_i64(k2) * zpow;
        zpow = zpow * zinv2;
    }
    acc - shift
}

/// ψ(m+1) = H_m − γ for integer m ≥ 0.
pub fn digamma_int_dd(m: u64) -> DD {
    let mut h = DD::ZERO;
    for i in 1..=m {
        h = h + DD::from_ratio(1, i as i64);
    }
    h - DD::EULER_GAMMA
}

/// ln(m!) for integer m ≥ 0.
pub fn ln_factorial_dd(m: u64) -> DD {
    if m < 2 {
        return DD::ZERO;
    }
    ln_gamma_dd(DD::from_i64(m as i64 + 1)).0
}

/// Gamma-family evaluation at a real argument.
pub fn gamma_real(x: f64, which: GammaKind) -> Result<f64> {
    if !x.is_finite() {
        return Err(GmqError::domain(format!("non-finite argument {x}")));
    }
    if is_pole(x) {
        return Err(GmqError::domain(format!(
            "x = {x} is a pole of the gamma function"
        )));
    }
    let z = DD::from_f64(x);
    Ok(match which {
        GammaKind::Gamma => {
            let (lg, sign) = ln_gamma_dd(z);
            sign * lg.exp().to_f64()
        }
        GammaKind::LogAbsGamma => ln_gamma_dd(z).0.to_f64(),
        GammaKind::Digamma => digamma_dd(z).to_f64(),
    })
}

pub fn gamma(x: f64) -> Result<f64> {
    gamma_real(x, GammaKind::Gamma)
}

pub fn digamma(x: f64) -> Result<f64> {
    gamma_real(x, GammaKind::Digamma)
}
