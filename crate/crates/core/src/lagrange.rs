//! The quasi-Lagrange function Ψ = Σ μ_k φ(‖· − k‖) and lattice sums of it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble as DD;
use crate::error::{GmqError, Result};
use crate::fit::log_log_fit;
use crate::symbol::{flatness_directions, Stencil};

/// Largest truncation radius for one-dimensional sums.
pub const MAX_RADIUS_1D: u32 = 1_000_000;
/// Largest truncation radius in three dimensions (about 1.7M points).
pub const MAX_RADIUS_3D: u32 = 60;
/// Upper bound on lattice points per evaluation in other dimensions.
const MAX_POINTS: u64 = 2_000_000;
const TAIL_SAFETY: f64 = 4.0;
const MAX_MOMENT: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSumSettings {
    pub truncation_radius: u32,
    pub tail_tolerance: f64,
    pub degree_hint: u32,
    /// Extrapolate in R from sums at R/2 and R, assuming the tail decays
    /// like R^{degree_hint − 2d}.
    #[serde(default)]
    pub extrapolate: bool,
}

impl LatticeSumSettings {
    pub fn new(truncation_radius: u32, tail_tolerance: f64, degree_hint: u32) -> Self {
        Self {
            truncation_radius,
            tail_tolerance,
            degree_hint,
            extrapolate: false,
        }
    }

    fn validate(&self, stencil: &Stencil) -> Result<()> {
        let d = stencil.params().d;
        let n = stencil.dim();
        if self.truncation_radius == 0 {
            return Err(GmqError::invalid("truncation radius must be positive"));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(GmqError::invalid("tail tolerance must be positive"));
        }
        if self.degree_hint >= 2 * d {
            return Err(GmqError::domain(format!(
                "degree hint {} ≥ 2d = {}: the lattice sum of a polynomial of this degree against Ψ does not converge \
                 (convergence holds only up to degree 2d − 1 = {})",
                self.degree_hint,
                2 * d,
                2 * d - 1
            )));
        }
        let cap = radius_cap(n);
        if self.truncation_radius > cap {
            return Err(GmqError::invalid(format!(
                "truncation radius {} exceeds the cap {cap} for n = {n}",
                self.truncation_radius
            )));
        }
        Ok(())
    }
}

pub fn radius_cap(n: usize) -> u32 {
    match n {
        1 => MAX_RADIUS_1D,
        3 => MAX_RADIUS_3D,
        _ => {
            let side = (MAX_POINTS as f64).powf(1.0 / n as f64);
            (((side - 1.0) / 2.0).floor() as u32).max(1)
        }
    }
}

/// Lattice values f(jh), indexed by j.
pub trait Sampler {
    fn sample(&self, j: &[i64]) -> f64;
}

impl<F: Fn(&[i64]) -> f64> Sampler for F {
    fn sample(&self, j: &[i64]) -> f64 {
        self(j)
    }
}

/// Stored samples; missing lattice points read as zero.
impl Sampler for BTreeMap<Vec<i64>, f64> {
    fn sample(&self, j: &[i64]) -> f64 {
        self.get(j).copied().unwrap_or(0.0)
    }
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Ψ with a far-field expansion in one dimension.
///
/// For x beyond twice the support, expanding φ(x−k) = Σ_m C(½,m) c^{2dm}
/// (x−k)^{d−2dm} in powers of k/x turns Ψ into a series in the moments M_j,
/// starting at the first nonvanishing one. The direct sum would lose every
/// digit there: Ψ decays like x^{−1−2d} while φ grows like x^d.
pub struct PsiEvaluator<'a> {
    stencil: &'a Stencil,
    scale: f64,
    scaled_moments: Vec<f64>,
}

impl<'a> PsiEvaluator<'a> {
    pub fn new(stencil: &'a Stencil) -> Self {
        let scale = f64::from(stencil.support_radius().max(1));
        let scaled_moments = if stencil.dim() == 1 {
            (0..=MAX_MOMENT)
                .map(|j| {
                    if j % 2 == 1 || (j as u32) < stencil.moment_order() {
                        return 0.0;
                    }
                    let mut acc = Neumaier::default();
                    for (k, w) in stencil.points() {
                        acc.add(w * (k[0] as f64 / scale).powi(j as i32));
                    }
                    acc.value()
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            stencil,
            scale,
            scaled_moments,
        }
    }

    pub fn stencil(&self) -> &Stencil {
        self.stencil
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if x.len() == 1 {
            let ax = x[0].abs();
            if ax >= 2.0 * self.scale && ax - self.scale >= 2.0 * self.stencil.params().c {
                return self.far_1d(ax);
            }
        } else if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 2.0 * self.scale {
            return self.far_projected(x);
        }
        self.direct(x)
    }

    /// Σ_k μ_k [φ(‖x − k‖) − T_k] in double-double, where T_k is the Taylor
    /// polynomial of φ(‖x − t k‖) at t = 0, cut below the moment order and
    /// evaluated at t = 1. Vanishing moments make Σ μ_k T_k = 0, so this is
    /// Ψ(x) with the weights' rounding in those moments removed.
    fn far_projected(&self, x: &[f64]) -> f64 {
        let params = self.stencil.params();
        let order = self.stencil.moment_order() as usize;
        let d = params.d;
        let c2d = DD::from_f64(params.c).powi(2 * d);
        let xd: Vec<DD> = x.iter().map(|&v| DD::from_f64(v)).collect();
        let x2 = xd.iter().fold(DD::ZERO, |a, &v| a + v.sqr());
        let mut total = DD::ZERO;
        for (k, w) in self.stencil.points() {
            let mut xk = DD::ZERO;
            let mut k2 = DD::ZERO;
            let mut r2 = DD::ZERO;
            for (&ki, &xi) in k.iter().zip(&xd) {
                let kd = DD::from_i64(ki);
                xk = xk + xi * kd;
                k2 = k2 + kd.sqr();
                r2 = r2 + (xi - kd).sqr();
            }
            let full = (c2d + r2.powi(d)).sqrt();
            // ‖x − t k‖² = x2 − 2t x·k + t² k2, raised to d, plus c^{2d}, then √.
            let mut u = vec![DD::ZERO; order.max(1)];
            u[0] = x2;
            if order > 1 {
                u[1] = -(xk + xk);
            }
            if order > 2 {
                u[2] = k2;
            }
            let mut v = u.clone();
            for _ in 1..d {
                v = series_mul(&v, &u);
            }
            v[0] = v[0] + c2d;
            let root = series_sqrt(&v);
            let taylor = root.iter().take(order).fold(DD::ZERO, |a, &t| a + t);
            total = total + (full - taylor).mul_f64(*w);
        }
        total.to_f64()
    }

    pub fn direct(&self, x: &[f64]) -> f64 {
        let params = self.stencil.params();
        let mut acc = Neumaier::default();
        for (k, w) in self.stencil.points() {
            let r2: f64 = k.iter().zip(x).map(|(&ki, &xi)| (xi - ki as f64).powi(2)).sum();
            acc.add(w * params.phi(r2.sqrt()));
        }
        acc.value()
    }

    fn far_1d(&self, x: f64) -> f64 {
        let params = self.stencil.params();
        let d = f64::from(params.d);
        let ratio = self.scale / x;
        let c2d = params.c.powf(2.0 * d);
        let decay = c2d / x.powf(2.0 * d);
        let mut total = Neumaier::default();
        let mut b_m = 1.0; // C(1/2, m)
        let mut weight = 1.0; // c^{2dm} x^{−2dm}
        for m in 0..200u32 {
            if m > 0 {
                let mf = f64::from(m);
                b_m *= (1.5 - mf) / mf;
                weight *= decay;
                if weight == 0.0 {
                    break;
                }
            }
            let a = d - 2.0 * d * f64::from(m);
            let inner = self.moment_series(a, ratio);
            let term = b_m * weight * x.powf(d) * inner;
            total.add(term);
            if m > 0 && term.abs() <= 1e-18 * total.value().abs() {
                break;
            }
            if params.c == 0.0 {
                break;
            }
        }
        total.value()
    }

    /// Σ_j C(a, j) ρ^j M̃_j with M̃_j the moments scaled by the support.
    fn moment_series(&self, a: f64, rho: f64) -> f64 {
        let mut acc = Neumaier::default();
        let mut binom = 1.0;
        let mut rho_j = 1.0;
        let mut small = 0;
        let mut peak = 0.0f64;
        for j in 0..=MAX_MOMENT {
            if j > 0 {
                binom *= (a - (j - 1) as f64) / j as f64;
                rho_j *= rho;
                if binom == 0.0 {
                    break;
                }
            }
            let mj = self.scaled_moments[j];
            if mj == 0.0 {
                continue;
            }
            let term = binom * rho_j * mj;
            acc.add(term);
            peak = peak.max(term.abs());
            if term.abs() <= 1e-19 * peak {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        acc.value()
    }
}

fn series_mul(a: &[DD], b: &[DD]) -> Vec<DD> {
    let n = a.len();
    let mut out = vec![DD::ZERO; n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] = out[i + j] + a[i] * b[j];
        }
    }
    out
}

/// Truncated power series of √v, for v[0] > 0.
fn series_sqrt(v: &[DD]) -> Vec<DD> {
    let n = v.len();
    let mut s = vec![DD::ZERO; n];
    s[0] = v[0].sqrt();
    let two_s0 = s[0] + s[0];
    for m in 1..n {
        let mut acc = v[m];
        for i in 1..m {
            acc = acc - s[i] * s[m - i];
        }
        s[m] = acc / two_s0;
    }
    s
}

/// Ψ(x) = Σ_k μ_k φ(‖x − k‖).
pub fn psi_eval(stencil: &Stencil, x: &[f64]) -> Result<f64> {
    if x.len() != stencil.dim() {
        return Err(GmqError::invalid(format!(
            "point has dimension {}, stencil has {}",
            x.len(),
            stencil.dim()
        )));
    }
    Ok(PsiEvaluator::new(stencil).eval(x))
}

/// Number of lattice points with ∞-norm r is at most this factor times r^{n−1}.
fn shell_factor(n: usize) -> f64 {
    2.0 * n as f64 * 3f64.powi(n as i32 - 1)
}

/// Decay constant K = max |Ψ(x)| ‖x‖^{n+2d} on a calibration shell.
///
/// In 1D the shell is ‖x‖ = R, evaluated with the far-field series. In
/// higher dimensions only the direct sum is available, which loses digits
/// with distance, so the shell is taken at min(R, 2·support + 2).
fn decay_constant(eval: &PsiEvaluator, radius: u32) -> f64 {
    let st = eval.stencil();
    let n = st.dim();
    let p = f64::from(n as u32 + 2 * st.params().d);
    let mut k = 0.0f64;
    if n == 1 {
        for t in [0.0, 0.25, 0.5, 0.75] {
            let x = f64::from(radius) + t;
            k = k.max(eval.eval(&[x]).abs() * x.powf(p));
        }
        return k;
    }
    let r = f64::from(radius);
    for dir in flatness_directions(n) {
        let inf = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for t in [0.0, 0.5] {
            let x: Vec<f64> = dir.iter().map(|v| (r + t) * v / inf).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            k = k.max(eval.eval(&x).abs() * norm.powf(p));
        }
    }
    k
}

/// A-priori bound on Σ_{‖j‖_∞ > R} ‖j‖^{degree} |Ψ(x − j)|.
pub fn tail_bound(stencil: &Stencil, settings: &LatticeSumSettings) -> Result<f64> {
    settings.validate(stencil)?;
    let eval = PsiEvaluator::new(stencil);
    Ok(tail_bound_with(&eval, settings))
}

fn tail_bound_with(eval: &PsiEvaluator, settings: &LatticeSumSettings) -> f64 {
    let st = eval.stencil();
    let n = st.dim();
    let two_d = f64::from(2 * st.params().d);
    let deg = f64::from(settings.degree_hint);
    let k = TAIL_SAFETY * decay_constant(eval, settings.truncation_radius);
    let r = f64::from(settings.truncation_radius);
    k * shell_factor(n) * r.powf(deg - two_d) / (two_d - deg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpValue {
    pub value: f64,
    pub tail_estimate: f64,
}

/// Q_h f(x) = Σ_j f(jh) Ψ(x/h − j) over ‖j − x/h‖_∞ ≤ R.
///
/// Terms are added in order of increasing distance from x/h (ties by j),
/// with compensated summation.
pub fn quasi_interp<S: Sampler + ?Sized>(
    stencil: &Stencil,
    f: &S,
    h: f64,
    x: &[f64],
    settings: &LatticeSumSettings,
) -> Result<InterpValue> {
    settings.validate(stencil)?;
    let n = stencil.dim();
    if x.len() != n {
        return Err(GmqError::invalid(format!("point must have dimension {n}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(GmqError::invalid(format!("grid spacing must be positive, got {h}")));
    }
    let eval = PsiEvaluator::new(stencil);
    let xs: Vec<f64> = x.iter().map(|v| v / h).collect();
    let r = settings.truncation_radius;
    let full = lattice_sum(&eval, f, &xs, r);

    // Scale the unit-growth bound by the size of f on the outer shell.
    let deg = settings.degree_hint as i32;
    let shell_scale = outer_shell_scale(f, &xs, r, deg);
    let mut tail = shell_scale * tail_bound_with(&eval, settings);
    let mut value = full;
    if settings.extrapolate {
        let half = (r / 2).max(1);
        let coarse = lattice_sum(&eval, f, &xs, half);
        let p = f64::from(2 * stencil.params().d) - f64::from(settings.degree_hint);
        let q = (f64::from(r) / f64::from(half)).powf(p);
        let corr = (full - coarse) / (q - 1.0);
        value = full + corr;
        tail = corr.abs();
    }
    if !(tail <= settings.tail_tolerance) {
        return Err(GmqError::domain(format!(
            "estimated truncation tail {tail:e} exceeds the tolerance {:e} at R = {r}; increase R \
             (cap {}), lower the degree hint {} toward 0, or enable extrapolation",
            settings.tail_tolerance,
            radius_cap(n),
            settings.degree_hint
        )));
    }
    Ok(InterpValue {
        value,
        tail_estimate: tail,
    })
}

fn box_ranges(xs: &[f64], r: u32) -> Vec<(i64, i64)> {
    xs.iter()
        .map(|&c| ((c - f64::from(r)).ceil() as i64, (c + f64::from(r)).floor() as i64))
        .collect()
}

fn for_each_point(ranges: &[(i64, i64)], mut visit: impl FnMut(&[i64])) {
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return;
    }
    loop {
        visit(&cur);
        let mut i = cur.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                for slot in cur.iter_mut().skip(i + 1).zip(ranges.iter().skip(i + 1)) {
                    *slot.0 = slot.1 .0;
                }
                break;
            }
        }
    }
}

fn outer_shell_scale<S: Sampler + ?Sized>(f: &S, xs: &[f64], r: u32, deg: i32) -> f64 {
    let ranges = box_ranges(xs, r);
    let n = xs.len();
    let mut m = 0.0f64;
    // corners and face centres of the truncation box
    let mut probe = vec![0i64; n];
    for mask in 0..3usize.pow(n as u32) {
        let mut t = mask;
        for i in 0..n {
            probe[i] = match t % 3 {
                0 => ranges[i].0,
                1 => ranges[i].1,
                _ => xs[i].round() as i64,
            };
            t /= 3;
        }
        if (0..n).all(|i| probe[i] == xs[i].round() as i64) {
            continue;
        }
        m = m.max(f.sample(&probe).abs());
    }
    (m / f64::from(r).powi(deg)).max(1.0)
}

fn lattice_sum<S: Sampler + ?Sized>(eval: &PsiEvaluator, f: &S, xs: &[f64], r: u32) -> f64 {
    let ranges = box_ranges(xs, r);
    let n = xs.len();
    let sides: Vec<u64> = ranges.iter().map(|&(a, b)| (b - a + 1).max(0) as u64).collect();
    // (distance, lexicographic ordinal in the box, Ψ)
    let mut terms: Vec<(f64, u64, f64)> = Vec::new();
    if n == 1 {
        for (ord, j) in (ranges[0].0..=ranges[0].1).enumerate() {
            let off = xs[0] - j as f64;
            terms.push((off.abs(), ord as u64, eval.eval(&[off])));
        }
    } else {
        // Tabulate φ once on the box enlarged by the support, then apply the
        // stencil as a convolution.
        let st = eval.stencil();
        let s = i64::from(st.support_radius());
        let big: Vec<(i64, i64)> = ranges.iter().map(|&(a, b)| (a - s, b + s)).collect();
        let big_sides: Vec<usize> = big.iter().map(|&(a, b)| (b - a + 1).max(0) as usize).collect();
        let mut strides = vec![1usize; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * big_sides[i + 1];
        }
        let mut table = Vec::with_capacity(big_sides.iter().product());
        let params = st.params();
        for_each_point(&big, |m| {
            let r2: f64 = m.iter().zip(xs).map(|(&mi, &xi)| (xi - mi as f64).powi(2)).sum();
            table.push(params.phi(r2.sqrt()));
        });
        let offsets: Vec<(isize, f64)> = st
            .points()
            .iter()
            .map(|(k, w)| {
                let o: isize = k.iter().zip(&strides).map(|(&ki, &sd)| ki as isize * sd as isize).sum();
                (o, *w)
            })
            .collect();
        let mut ord = 0u64;
        for_each_point(&ranges, |j| {
            let base: isize = j
                .iter()
                .zip(&big)
                .zip(&strides)
                .map(|((&ji, &(a, _)), &sd)| (ji - a) as isize * sd as isize)
                .sum();
            let psi: f64 = offsets.iter().map(|&(o, w)| w * table[(base + o) as usize]).sum();
            let dist = j.iter().zip(xs).map(|(&ji, &xi)| (xi - ji as f64).powi(2)).sum::<f64>().sqrt();
            terms.push((dist, ord, psi));
            ord += 1;
        });
    }
    terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut acc = Neumaier::default();
    let mut j = vec![0i64; n];
    for &(_, ord, psi) in &terms {
        let mut rest = ord;
        for i in (0..n).rev() {
            j[i] = ranges[i].0 + (rest % sides[i]) as i64;
            rest /= sides[i];
        }
        acc.add(f.sample(&j) * psi);
    }
    acc.value()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub direction: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// (r, |Ψ(r·direction)|) samples used in the fit.
    pub samples: Vec<(f64, f64)>,
    pub warning: Option<String>,
}

/// Least-squares slope of log|Ψ(r u)| against log r.
pub fn psi_decay_fit(stencil: &Stencil, direction: &[f64], radii: &[f64]) -> Result<DecayFit> {
    let n = stencil.dim();
    if direction.len() != n {
        return Err(GmqError::invalid(format!("direction must have dimension {n}")));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(GmqError::invalid("direction must be nonzero"));
    }
    let u: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let min_r = f64::from(stencil.support_radius()) + 5.0;
    if radii.len() < 2 || radii.iter().any(|&r| !(r >= min_r) || !r.is_finite()) {
        return Err(GmqError::invalid(format!(
            "need at least two radii, all ≥ support radius + 5 = {min_r}"
        )));
    }
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log10() < 1.5 - 1e-12 {
        return Err(GmqError::invalid(format!(
            "radii must span at least 1.5 decades, got [{lo}, {hi}]"
        )));
    }
    let eval = PsiEvaluator::new(stencil);
    let mut samples = Vec::new();
    let mut dropped = 0usize;
    for &r in radii {
        let x: Vec<f64> = u.iter().map(|v| r * v).collect();
        let v = eval.eval(&x).abs();
        if v < 1e-300 {
            dropped += 1;
        } else {
            samples.push((r, v));
        }
    }
    let warning = (dropped > 0).then(|| {
        format!("{dropped} of {} radii dropped: |Ψ| below 1e-300", radii.len())
    });
    let (slope, intercept) = match log_log_fit(&samples) {
        Some(f) => (f.slope, f.intercept),
        None => (f64::NEG_INFINITY, f64::NAN),
    };
    Ok(DecayFit {
        direction: u,
        slope,
        intercept,
        samples,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::RbfParams;
    use crate::symbol::build_stencil;

    #[test]
    fn far_field_matches_direct_where_both_are_accurate() {
        let p = RbfParams::new(1.0, 1, 1).unwrap();
        let s = build_stencil(&p, 1, 1).unwrap();
        let e = PsiEvaluator::new(&s);
        for &x in &[3.0, 4.5, 7.0, 20.0] {
            let a = e.far_1d(x);
            let b = e.direct(&[x]);
            assert!((a - b).abs() < 1e-13, "{x}: {a} {b}");
        }
    }

    #[test]
    fn projected_sum_matches_direct_in_three_dimensions() {
        for (d, target) in [(1, 1), (3, 3)] {
            let p = RbfParams::new(1.0, d, 3).unwrap();
            let s = build_stencil(&p, 4, target).unwrap();
            let e = PsiEvaluator::new(&s);
            for x in [[3.0, 0.5, -1.0], [6.0, 2.0, 1.0], [0.3, 7.7, -4.1]] {
                let a = e.far_projected(&x);
                let b = e.direct(&x);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((a - b).abs() < 1e-14 * r.powi(d as i32) * 10.0, "{x:?}: {a} {b}");
            }
        }
    }

    #[test]
    fn lattice_walk_visits_box() {
        let mut count = 0;
        for_each_point(&[(-1, 1), (0, 2), (5, 5)], |_| count += 1);
        assert_eq!(count, 9);
    }
}
