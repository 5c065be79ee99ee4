use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::Serialize;

use super::RbfParams;
use crate::error::{GmqError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleFamily {
    /// From Γ(−1/2 − t), at t = m − 1/2.
    HalfInteger,
    /// From Γ(n/2 − d t), at t = (n + 2m)/(2d).
    GammaThird,
    /// A half-integer location killed by the zero of 1/Γ(d t).
    Cancelled,
}

/// A pole of the Mellin–Barnes integrand
/// Γ(t) Γ(−1/2 − t) Γ(n/2 − d t) / Γ(d t).
///
/// Double poles (both numerator families coinciding) are tagged
/// `HalfInteger` with order 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pole {
    pub location: Rational64,
    pub order: u8,
    pub family: PoleFamily,
}

impl Pole {
    pub fn location_f64(&self) -> f64 {
        *self.location.numer() as f64 / *self.location.denom() as f64
    }
}

/// All poles with −1/2 ≤ t ≤ `t_max`, ascending.
pub fn enumerate_poles(params: &RbfParams, t_max: f64) -> Result<Vec<Pole>> {
    params.validate()?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(GmqError::invalid(format!("t_max must be positive, got {t_max}")));
    }
    let n = params.n as i64;
    let d = params.d as i64;
    let limit = t_max.floor() as i64 + 1;
    let mut hits: BTreeMap<Rational64, (bool, bool)> = BTreeMap::new();

    for m in 0..=limit {
        let t = Rational64::new(2 * m - 1, 2);
        if to_f64(t) <= t_max {
            hits.entry(t).or_default().0 = true;
        }
    }
    let mut m = 0;
    loop {
        let t = Rational64::new(n + 2 * m, 2 * d);
        if to_f64(t) > t_max {
            break;
        }
        hits.entry(t).or_default().1 = true;
        m += 1;
    }

    let out = hits
        .into_iter()
        .map(|(t, (half, third))| {
            let dt = t * Rational64::from_integer(d);
            let cancelled = dt.is_integer() && dt.to_integer() <= 0;
            if cancelled {
                Pole {
                    location: t,
                    order: 0,
                    family: PoleFamily::Cancelled,
                }
            } else if half && third {
                Pole {
                    location: t,
                    order: 2,
                    family: PoleFamily::HalfInteger,
                }
            } else {
                Pole {
                    location: t,
                    order: 1,
                    family: if half {
                        PoleFamily::HalfInteger
                    } else {
                        PoleFamily::GammaThird
                    },
                }
            }
        })
        .collect();
    Ok(out)
}

fn to_f64(t: Rational64) -> f64 {
    *t.numer() as f64 / *t.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(n: u32, d: u32, t_max: f64) -> Vec<(i64, i64, u8)> {
        let p = RbfParams::new(1.0, d, n).unwrap();
        enumerate_poles(&p, t_max)
            .unwrap()
            .iter()
            .map(|q| (*q.location.numer(), *q.location.denom(), q.order))
            .collect()
    }

    #[test]
    fn n1_d3() {
        assert_eq!(
            summary(1, 3, 1.0),
            vec![(-1, 2, 1), (1, 6, 1), (1, 2, 2), (5, 6, 1)]
        );
    }

    #[test]
    fn n1_d1() {
        assert_eq!(summary(1, 1, 1.0), vec![(-1, 2, 1), (1, 2, 2)]);
    }

    #[test]
    fn even_n_has_no_double_pole() {
        assert_eq!(summary(2, 1, 1.0), vec![(-1, 2, 1), (1, 2, 1), (1, 1, 1)]);
    }

    #[test]
    fn even_d_cancels_minus_half() {
        let p = RbfParams::new(1.0, 2, 3).unwrap();
        let poles = enumerate_poles(&p, 2.0).unwrap();
        assert_eq!(poles[0].family, PoleFamily::Cancelled);
        assert_eq!(poles[0].order, 0);
        assert_eq!(poles[0].location, Rational64::new(-1, 2));
    }

    #[test]
    fn rejects_bad_t_max() {
        let p = RbfParams::new(1.0, 1, 1).unwrap();
        assert!(enumerate_poles(&p, 0.0).is_err());
        assert!(enumerate_poles(&p, f64::NAN).is_err());
    }
}
