use serde::Serialize;

use super::stencil::Stencil;
use crate::error::{GmqError, Result};
use crate::fit::{log_log_fit, log_space};
use crate::specfun::phi_hat;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const SAMPLES_PER_DIRECTION: usize = 9;

/// cos x minus its Taylor polynomial of degree < 2q0.
fn cos_remainder(x: f64, q0: u32) -> f64 {
    if q0 == 0 {
        return x.cos();
    }
    let x2 = x * x;
    if x.abs() <= 1.0 {
        // Σ_{q ≥ q0} (−1)^q x^{2q} / (2q)!
        let mut term = 1.0;
        for q in 1..=q0 {
            term *= -x2 / ((2 * q - 1) as f64 * (2 * q) as f64);
        }
        let mut sum = term;
        let mut q = q0;
        loop {
            q += 1;
            term *= -x2 / ((2 * q - 1) as f64 * (2 * q) as f64);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                return sum;
            }
        }
    }
    let mut poly = 0.0;
    let mut term = 1.0;
    for q in 0..q0 {
        if q > 0 {
            term *= -x2 / ((2 * q - 1) as f64 * (2 * q) as f64);
        }
        poly += term;
    }
    x.cos() - poly
}

/// p(y) = Σ_k μ_k e^{−ik·y}.
///
/// The Taylor orders removed by the moment conditions are subtracted from
/// every cosine before summing, so small ‖y‖ does not cancel catastrophically.
/// For a stencil whose moments vanish this is the same trigonometric sum, so
/// once some |k·y| exceeds 1 the plain sum is used instead.
pub fn symbol_eval(stencil: &Stencil, y: &[f64]) -> Result<f64> {
    if y.len() != stencil.dim() {
        return Err(GmqError::invalid(format!(
            "point has dimension {}, stencil has {}",
            y.len(),
            stencil.dim()
        )));
    }
    let reach = f64::from(stencil.support_radius()) * y.iter().map(|v| v.abs()).sum::<f64>();
    let q0 = if reach <= 1.0 { stencil.moment_order() / 2 } else { 0 };
    let mut re = 0.0;
    let mut im = 0.0;
    let mut scale = 0.0;
    for (k, w) in stencil.points() {
        let x: f64 = k.iter().zip(y).map(|(&ki, &yi)| ki as f64 * yi).sum();
        re += w * cos_remainder(x, q0);
        im -= w * x.sin();
        scale += w.abs();
    }
    if im.abs() > 1e-13 * scale.max(1.0) {
        return Err(GmqError::numerical(format!(
            "symbol has imaginary part {im:e}; the stencil is not symmetric"
        )));
    }
    Ok(re)
}

/// Ψ̂(y) = p(y) φ̂(‖y‖), for y ≠ 0.
pub fn psi_hat_eval(stencil: &Stencil, y: &[f64]) -> Result<f64> {
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(GmqError::domain(
            "Ψ̂ is not evaluated at y = 0, where φ̂ is singular; use flatness_order for the limit",
        ));
    }
    Ok(symbol_eval(stencil, y)? * phi_hat(stencil.params(), r)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionalOrder {
    pub direction: Vec<f64>,
    pub fitted_order: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessReport {
    /// The lattice point j; the sampled location is 2πj.
    pub location: Vec<i64>,
    pub decade: (f64, f64),
    /// Pooled least-squares slope over all directions.
    pub fitted_order: f64,
    pub per_direction: Vec<DirectionalOrder>,
    /// (|y − 2πj|, |Ψ̂(y) − δ_{j,0}|) for every sample.
    pub residual_curve: Vec<(f64, f64)>,
}

/// Sampling directions: the axes and diagonals in 1D/3D, plus a generic one.
pub fn flatness_directions(n: usize) -> Vec<Vec<f64>> {
    let unit = |v: Vec<f64>| {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / r).collect::<Vec<f64>>()
    };
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        3 => vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            unit(vec![1.0, 1.0, 0.0]),
            unit(vec![1.0, 1.0, 1.0]),
            unit(vec![1.0, 2.0, 3.0]),
        ],
        _ => {
            let mut out: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            out.push(unit(vec![1.0; n]));
            out
        }
    }
}

/// Vanishing order of Ψ̂ − δ_{j,0} at 2πj, fitted over `decade` in |y − 2πj|.
pub fn flatness_order(stencil: &Stencil, at: &[i64], decade: (f64, f64)) -> Result<FlatnessReport> {
    let n = stencil.dim();
    if at.len() != n {
        return Err(GmqError::invalid(format!("lattice point must have dimension {n}")));
    }
    let (lo, hi) = decade;
    if !(lo > 0.0 && lo < hi && hi < std::f64::consts::PI) {
        return Err(GmqError::invalid(format!(
            "sampling decade must satisfy 0 < r_min < r_max < π, got ({lo}, {hi})"
        )));
    }
    let origin = at.iter().all(|&j| j == 0);
    let radii = log_space(lo, hi, SAMPLES_PER_DIRECTION);
    let mut per_direction = Vec::new();
    let mut pooled = Vec::new();
    for dir in flatness_directions(n) {
        let mut curve = Vec::with_capacity(radii.len());
        for &r in &radii {
            let delta: Vec<f64> = dir.iter().map(|u| r * u).collect();
            // p is 2π-periodic, so it is evaluated at the offset itself.
            let p = symbol_eval(stencil, &delta)?;
            let y: Vec<f64> = at.iter().zip(&delta).map(|(&j, dv)| TWO_PI * j as f64 + dv).collect();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let v = p * phi_hat(stencil.params(), ny)?;
            let resid = if origin { (v - 1.0).abs() } else { v.abs() };
            curve.push((r, resid));
        }
        let order = log_log_fit(&curve).map_or(f64::INFINITY, |f| f.slope);
        per_direction.push(DirectionalOrder {
            direction: dir,
            fitted_order: order,
        });
        pooled.extend(curve);
    }
    let fitted_order = log_log_fit(&pooled).map_or(f64::INFINITY, |f| f.slope);
    Ok(FlatnessReport {
        location: at.to_vec(),
        decade,
        fitted_order,
        per_direction,
        residual_curve: pooled,
    })
}
