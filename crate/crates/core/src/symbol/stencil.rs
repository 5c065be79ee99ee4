use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GmqError, Result};
use crate::specfun::RbfParams;

/// One orbit of the hyperoctahedral group acting on ℤⁿ, keyed by its
/// sorted nonnegative representative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orbit {
    pub representative: Vec<i64>,
    pub weight: f64,
}

/// Fully symmetric finite coefficient set {(k, μ_k)}.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    params: RbfParams,
    orbits: Vec<Orbit>,
    support_radius: u32,
    points: Vec<(Vec<i64>, f64)>,
    moment_order: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StencilFile {
    params: RbfParams,
    orbits: Vec<Orbit>,
}

/// Canonical representative: absolute values sorted ascending.
pub fn canonical(k: &[i64]) -> Vec<i64> {
    let mut r: Vec<i64> = k.iter().map(|v| v.abs()).collect();
    r.sort_unstable();
    r
}

/// All images of `rep` under coordinate permutations and sign flips.
pub fn orbit_points(rep: &[i64]) -> Vec<Vec<i64>> {
    let n = rep.len();
    let mut out = BTreeSet::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        for mask in 0..(1u32 << n) {
            let p: Vec<i64> = (0..n)
                .map(|i| {
                    let v = rep[perm[i]];
                    if mask & (1 << i) != 0 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            out.insert(p);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out.into_iter().collect()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Sorted representatives 0 ≤ k₁ ≤ … ≤ kₙ ≤ radius, in lexicographic order.
pub fn representatives(n: usize, radius: u32) -> Vec<Vec<i64>> {
    fn rec(n: usize, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in lo..=hi {
            cur.push(v);
            rec(n, v, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, radius as i64, &mut Vec::new(), &mut out);
    out
}

impl Stencil {
    pub fn from_orbits(params: RbfParams, orbits: Vec<Orbit>) -> Result<Self> {
        params.validate()?;
        let n = params.n as usize;
        let mut seen = BTreeSet::new();
        for o in &orbits {
            if o.representative.len() != n {
                return Err(GmqError::invalid(format!(
                    "orbit representative {:?} does not have dimension {n}",
                    o.representative
                )));
            }
            if canonical(&o.representative) != o.representative {
                return Err(GmqError::invalid(format!(
                    "orbit representative {:?} is not sorted and nonnegative",
                    o.representative
                )));
            }
            if !o.weight.is_finite() {
                return Err(GmqError::invalid("orbit weight is not finite"));
            }
            if !seen.insert(o.representative.clone()) {
                return Err(GmqError::invalid(format!(
                    "duplicate orbit {:?}",
                    o.representative
                )));
            }
        }
        let support_radius = orbits
            .iter()
            .filter(|o| o.weight != 0.0)
            .flat_map(|o| o.representative.iter().copied())
            .max()
            .unwrap_or(0) as u32;
        let mut orbits = orbits;
        orbits.sort_by(|a, b| a.representative.cmp(&b.representative));
        let mut points: Vec<(Vec<i64>, f64)> = orbits
            .iter()
            .filter(|o| o.weight != 0.0)
            .flat_map(|o| orbit_points(&o.representative).into_iter().map(move |k| (k, o.weight)))
            .collect();
        points.sort_by(|a, b| a.0.cmp(&b.0));
        let mut s = Self {
            params,
            orbits,
            support_radius,
            points,
            moment_order: 0,
        };
        s.moment_order = s.detect_moment_order();
        Ok(s)
    }

    /// Largest even m ≤ n + d with every moment of degree < m negligible
    /// (≤ 1e−9 relative to Σ|μ_k| ‖k‖_∞^{|α|}).
    fn detect_moment_order(&self) -> u32 {
        let n = self.dim();
        let top = self.params.n + self.params.d;
        let abs_sum: f64 = self.points.iter().map(|(_, w)| w.abs()).sum();
        let rad = self.support_radius.max(1) as f64;
        let mut m = 0;
        while m + 2 <= top {
            let ok = multi_indices(n, m + 1)
                .iter()
                .filter(|a| a.iter().sum::<u32>() >= m)
                .all(|a| {
                    let deg = a.iter().sum::<u32>() as i32;
                    self.moment(a).abs() <= 1e-9 * abs_sum * rad.powi(deg)
                });
            if !ok {
                break;
            }
            m += 2;
        }
        m
    }

    /// Number of leading Taylor orders of the symbol that vanish by the
    /// moment conditions (even, at most n + d).
    pub fn moment_order(&self) -> u32 {
        self.moment_order
    }

    /// Expanded lattice points with weights, sorted lexicographically.
    pub fn points(&self) -> &[(Vec<i64>, f64)] {
        &self.points
    }

    /// Reduces a full map k → μ_k to orbits; fails if it is not symmetric.
    pub fn from_entries(params: RbfParams, entries: &BTreeMap<Vec<i64>, f64>) -> Result<Self> {
        let mut orbits: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (k, &w) in entries {
            let rep = canonical(k);
            match orbits.get(&rep) {
                Some(&w0) if w0 != w => {
                    return Err(GmqError::invalid(format!(
                        "entries are not symmetric: orbit {rep:?} has weights {w0} and {w}"
                    )))
                }
                _ => {
                    orbits.insert(rep, w);
                }
            }
        }
        for rep in orbits.keys() {
            for k in orbit_points(rep) {
                if !entries.contains_key(&k) {
                    return Err(GmqError::invalid(format!(
                        "entries are not symmetric: {k:?} missing from orbit {rep:?}"
                    )));
                }
            }
        }
        let orbits = orbits
            .into_iter()
            .map(|(representative, weight)| Orbit {
                representative,
                weight,
            })
            .collect();
        Self::from_orbits(params, orbits)
    }

    pub fn params(&self) -> &RbfParams {
        &self.params
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn support_radius(&self) -> u32 {
        self.support_radius
    }

    pub fn dim(&self) -> usize {
        self.params.n as usize
    }

    /// Every lattice point with its weight, sorted lexicographically.
    pub fn entries(&self) -> BTreeMap<Vec<i64>, f64> {
        self.points.iter().cloned().collect()
    }

    pub fn weight(&self, k: &[i64]) -> f64 {
        let rep = canonical(k);
        self.orbits
            .iter()
            .find(|o| o.representative == rep)
            .map_or(0.0, |o| o.weight)
    }

    /// Σ_k μ_k k^α, with the integer orbit sums formed exactly.
    pub fn moment(&self, alpha: &[u32]) -> f64 {
        self.orbits
            .iter()
            .map(|o| o.weight * orbit_monomial_sum(&o.representative, alpha) as f64)
            .sum()
    }

    /// max |Σ μ_k k^α| over all multi-indices with |α| < n + d.
    pub fn max_moment_residual(&self) -> f64 {
        let n = self.dim();
        let top = self.params.n + self.params.d;
        multi_indices(n, top - 1)
            .iter()
            .map(|a| self.moment(a).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StencilFile {
            params: self.params,
            orbits: self.orbits.clone(),
        })
        .expect("stencil serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: StencilFile = serde_json::from_str(s)
            .map_err(|e| GmqError::invalid(format!("stencil JSON: {e}")))?;
        Self::from_orbits(f.params, f.orbits)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

impl Serialize for Stencil {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StencilFile {
            params: self.params,
            orbits: self.orbits.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Stencil {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = StencilFile::deserialize(d)?;
        Stencil::from_orbits(f.params, f.orbits).map_err(serde::de::Error::custom)
    }
}

/// Σ over the orbit of `rep` of k^α, exactly.
pub fn orbit_monomial_sum(rep: &[i64], alpha: &[u32]) -> i128 {
    orbit_points(rep)
        .iter()
        .map(|k| {
            k.iter()
                .zip(alpha)
                .map(|(&ki, &ai)| (ki as i128).pow(ai))
                .product::<i128>()
        })
        .sum()
}

/// All α ∈ ℕⁿ with |α| ≤ max_total.
pub fn multi_indices(n: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(n, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_total, &mut Vec::new(), &mut out);
    out
}
