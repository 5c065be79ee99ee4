//! Construction of μ_k from moment, radiality and normalization conditions.
//!
//! Writing p(y) = Σ_k μ_k cos(k·y) and M_α = Σ_k μ_k k^α, the homogeneous
//! part of p of degree 2q is (−1)^q Σ_{|α|=2q} M_α y^α / α!. Only even α
//! survive the symmetry. The conditions are
//!   M_α = 0                                  for |α| < n + d,
//!   (−1)^q M_α / α! = P_r q! / Π(α_i/2)!     for |α| = 2q = n + d + 2r,
//! the second line forcing the degree-2q part to equal P_r ‖y‖^{2q}.
//! The P_r are fixed by p φ̂ = 1 + O(‖y‖^{target+1}).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::stencil::{orbit_monomial_sum, representatives, Orbit, Stencil};
use crate::error::{GmqError, Result};
use crate::specfun::{expansion_at_zero, RbfParams};

/// Largest radius tried when searching for a feasible support in 1D.
pub const RADIUS_CAP_1D: u32 = 48;
/// Largest radius allowed in 3D.
pub const RADIUS_CAP_3D: u32 = 4;

const SOLVE_RESIDUAL: f64 = 1e-10;

/// Highest target order the expansion of φ̂ permits before its first
/// logarithmic term: 2d(⌈(n−d)/(2d)⌉ + 1) − 1.
pub fn max_target_order(params: &RbfParams) -> u32 {
    let n = params.n as i64;
    let d = params.d as i64;
    let ceil = (n - d).div_euclid(2 * d) + i64::from((n - d).rem_euclid(2 * d) != 0);
    (2 * d * (ceil + 1) - 1) as u32
}

pub fn default_target_order(params: &RbfParams) -> u32 {
    (2 * params.d - 1).min(max_target_order(params))
}

/// P_0, P_1, … such that (Σ_r P_r s^{n+d+2r}) φ̂(s) = 1 + O(s^{target+1}).
pub fn radial_targets(params: &RbfParams, target_order: u32) -> Result<Vec<f64>> {
    let n = params.n as i64;
    let d = params.d as i64;
    let levels = (target_order as i64 - 1) / 2 + 1;
    let lead = -n - d;
    let top = lead + 2 * (levels - 1);
    let terms = expansion_at_zero(params, top)?;
    if let Some(t) = terms.iter().find(|t| t.log_flag) {
        return Err(GmqError::domain(format!(
            "target order {target_order} reaches the logarithmic term s^{} log(cs) of the transform; \
             the largest admissible target is {}",
            t.exponent,
            max_target_order(params)
        )));
    }
    let coef = |e: i64| -> f64 {
        terms
            .iter()
            .find(|t| t.exponent.is_integer() && t.exponent.to_integer() == e)
            .map_or(0.0, |t| t.coefficient)
    };
    let c0 = coef(lead);
    if c0 == 0.0 {
        return Err(GmqError::domain("leading coefficient of the transform vanishes"));
    }
    let mut p: Vec<f64> = Vec::with_capacity(levels as usize);
    for j in 0..levels {
        let rhs = if j == 0 { 1.0 } else { 0.0 };
        let acc: f64 = (0..j).map(|r| p[r as usize] * coef(lead + 2 * (j - r))).sum();
        p.push((rhs - acc) / c0);
    }
    Ok(p)
}

/// Sorted partitions of `total` into at most n even parts, as α ∈ ℕⁿ.
fn even_partitions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, max_part: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            if left == 0 {
                let mut a = cur.clone();
                a.sort_unstable();
                out.push(a);
            }
            return;
        }
        let mut v = max_part.min(left);
        loop {
            if v % 2 == 0 {
                cur.push(v);
                rec(n, left - v, v, cur, out);
                cur.pop();
            }
            if v == 0 {
                break;
            }
            v -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, total, total, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Constraint rows (α, right-hand side of M_α).
fn constraints(params: &RbfParams, target_order: u32) -> Result<Vec<(Vec<u32>, f64)>> {
    let n = params.n as usize;
    let nd = params.n + params.d;
    let p = radial_targets(params, target_order)?;
    let mut rows = Vec::new();
    for two_q in (0..nd).step_by(2) {
        for a in even_partitions(n, two_q) {
            rows.push((a, 0.0));
        }
    }
    for (r, &pr) in p.iter().enumerate() {
        let two_q = nd + 2 * r as u32;
        let q = two_q / 2;
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        for a in even_partitions(n, two_q) {
            let alpha_fact: f64 = a.iter().map(|&ai| factorial(ai)).product();
            let half_fact: f64 = a.iter().map(|&ai| factorial(ai / 2)).product();
            // M_α = (−1)^q α! P_r q! / Π(α_i/2)!
            rows.push((a, sign * alpha_fact * pr * factorial(q) / half_fact));
        }
    }
    Ok(rows)
}

fn check_regime(params: &RbfParams) -> Result<u32> {
    params.require_odd_odd()?;
    match params.n {
        1 => Ok(RADIUS_CAP_1D),
        3 if params.d == 1 || params.d == 3 => Ok(RADIUS_CAP_3D),
        3 => Err(GmqError::Infeasible {
            message: format!(
                "three-dimensional stencils are limited to d ∈ {{1, 3}} (got d = {})",
                params.d
            ),
            minimal_radius: None,
        }),
        n => Err(GmqError::domain(format!(
            "stencil construction supports n ∈ {{1, 3}}, got n = {n}"
        ))),
    }
}

/// Min-norm solve at one radius; `None` if the system is inconsistent.
fn solve_at_radius(
    params: &RbfParams,
    rows: &[(Vec<u32>, f64)],
    radius: u32,
) -> Option<Vec<Orbit>> {
    let reps = representatives(params.n as usize, radius);
    if reps.len() < rows.len() {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(rows.len(), reps.len());
    let mut b = DVector::<f64>::zeros(rows.len());
    for (i, (alpha, rhs)) in rows.iter().enumerate() {
        let vals: Vec<f64> = reps
            .iter()
            .map(|r| orbit_monomial_sum(r, alpha) as f64)
            .collect();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(rhs.abs());
        let scale = if scale > 0.0 { scale } else { 1.0 };
        for (j, v) in vals.iter().enumerate() {
            a[(i, j)] = v / scale;
        }
        b[i] = rhs / scale;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd.solve(&b, 1e-12 * smax).ok()?;
    let resid = (&a * &x - &b).norm();
    if !(resid <= SOLVE_RESIDUAL * b.norm().max(1.0)) {
        return None;
    }
    Some(
        reps.into_iter()
            .zip(x.iter())
            .map(|(representative, &weight)| Orbit {
                representative,
                weight,
            })
            .collect(),
    )
}

/// Symmetric stencil of support at most `support_radius`.
///
/// Radii are tried in increasing order and the first feasible one is used,
/// so the result has the smallest support admitting a solution; within it
/// the orbit weights are the minimum-norm solution.
pub fn build_stencil(params: &RbfParams, support_radius: u32, target_order: u32) -> Result<Stencil> {
    let cap = check_regime(params)?;
    let max_t = max_target_order(params);
    if target_order == 0 || target_order > max_t {
        return Err(GmqError::domain(format!(
            "target order must lie in 1..={max_t} for n = {}, d = {} (got {target_order})",
            params.n, params.d
        )));
    }
    let rows = constraints(params, target_order)?;
    if support_radius > cap {
        return Err(GmqError::Infeasible {
            message: format!("support radius {support_radius} exceeds the cap {cap} for n = {}", params.n),
            minimal_radius: None,
        });
    }
    for r in 1..=support_radius {
        if let Some(orbits) = solve_at_radius(params, &rows, r) {
            return Stencil::from_orbits(*params, orbits);
        }
    }
    let minimal = (support_radius + 1..=cap).find(|&r| solve_at_radius(params, &rows, r).is_some());
    let message = match minimal {
        Some(r) => format!(
            "infeasible; minimal support radius {r} (requested {support_radius}) for n = {}, d = {}, target order {target_order}",
            params.n, params.d
        ),
        None => format!(
            "infeasible; no support radius ≤ {cap} satisfies the conditions for n = {}, d = {}, target order {target_order}",
            params.n, params.d
        ),
    };
    Err(GmqError::Infeasible {
        message,
        minimal_radius: minimal,
    })
}

/// y²-Taylor coefficients of (2 sin(y/2) / y)^{2j}, orders 0..=len-1.
fn sinc_power(j: u32, len: usize) -> Vec<f64> {
    // 2 sin(y/2)/y = Σ_l (−1)^l y^{2l} / (4^l (2l+1)!)
    let base: Vec<f64> = (0..len)
        .map(|l| {
            let s = if l % 2 == 0 { 1.0 } else { -1.0 };
            s / (4f64.powi(l as i32) * factorial(2 * l as u32 + 1))
        })
        .collect();
    let mut acc = vec![0.0; len];
    acc[0] = 1.0;
    for _ in 0..2 * j {
        let mut next = vec![0.0; len];
        for (i, &a) in acc.iter().enumerate() {
            for (k, &b) in base.iter().enumerate().take(len - i) {
                next[i + k] += a * b;
            }
        }
        acc = next;
    }
    acc
}

fn binomial(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return 0.0;
    }
    let k = k as u32;
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// 1D stencil from p(y) = Σ_{i<d} b_i (2 sin(y/2))^{2(q+i)}, q = (d+1)/2,
/// with the b_i fixed by back substitution against the same targets P_r.
pub fn build_stencil_1d_closed(params: &RbfParams) -> Result<Stencil> {
    params.require_odd_odd()?;
    if params.n != 1 {
        return Err(GmqError::domain("the closed-form construction is one-dimensional"));
    }
    let d = params.d;
    let q = d.div_ceil(2);
    let p = radial_targets(params, 2 * d - 1)?;
    let len = d as usize;
    let tables: Vec<Vec<f64>> = (0..d).map(|i| sinc_power(q + i, len)).collect();
    let mut b = vec![0.0; len];
    for r in 0..len {
        let acc: f64 = (0..r).map(|i| b[i] * tables[i][r - i]).sum();
        b[r] = p[r] - acc;
    }
    // (2 sin(y/2))^{2j} = Σ_k (−1)^k C(2j, j+k) e^{iky}
    let support = (q + d - 1) as i64;
    let mut entries: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for k in -support..=support {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let w: f64 = (0..d)
            .map(|i| {
                let j = q + i;
                b[i as usize] * sign * binomial(2 * j, j as i64 + k)
            })
            .sum();
        entries.insert(vec![k], w);
    }
    Stencil::from_entries(*params, &entries)
}
