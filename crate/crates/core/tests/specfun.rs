use std::f64::consts::PI;

use gmq_core::gamma::{digamma, gamma};
use gmq_core::specfun::{
    asymptotic_leading, enumerate_poles, expansion_at_zero, phi_hat, phi_hat_oracle, phi_hat_series, LeadingCase,
    PoleFamily, RbfParams, SERIES_GUARD,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn params(c: f64, d: u32, n: u32) -> RbfParams {
    RbfParams::new(c, d, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// K₁(z) = ½ ∫ e^{−z cosh t} cosh t dt, trapezoid rule on the real line.
fn bessel_k1(z: f64) -> f64 {
    let h = 0.01f64;
    let mut sum = 0.5 * (-z).exp();
    let mut t: f64 = h;
    loop {
        let v = (-z * t.cosh()).exp() * t.cosh();
        sum += v;
        if v < 1e-300 || v < 1e-20 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

fn multiquadric_transform(c: f64, s: f64) -> f64 {
    -2.0 * c / s * bessel_k1(c * s)
}

#[test]
fn gamma_reference_values() {
    assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-15);
    assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-15);
    assert!(rel(digamma(1.0).unwrap(), -0.5772156649015329) < 1e-15);
    assert!(gamma(-2.0).is_err());
}

#[test]
fn multiquadric_matches_bessel_form() {
    for c in [0.5, 1.0, 2.0] {
        for i in 0..=20 {
            let cs = 0.1 * 100f64.powf(f64::from(i) / 20.0);
            let s = cs / c;
            let v = phi_hat_series(&params(c, 1, 1), s).unwrap();
            assert!(rel(v, multiquadric_transform(c, s)) < 1e-8, "c={c} s={s}");
        }
    }
    let v = phi_hat(&params(1.0, 1, 1), 1.0).unwrap();
    // −2·K₁(1), K₁(1) = 0.60190723019723457.
    assert!((v - -1.2038144603944691).abs() < 1e-13, "{v}");
}

#[test]
fn oracle_matches_bessel_form() {
    let o = phi_hat_oracle(&params(1.0, 1, 1), 1.0, 1e-8).unwrap();
    assert!((o.value - multiquadric_transform(1.0, 1.0)).abs() < 1e-8);
    assert!(o.error_estimate <= 1e-8);
    assert!(!o.table.is_empty());
}

#[test]
fn polyharmonic_limits() {
    // |x| in one dimension transforms to −2/s², ‖x‖ in three to −8π/s⁴.
    let line = phi_hat_oracle(&params(0.0, 1, 1), 2.0, 1e-8).unwrap();
    assert!((line.value + 0.5).abs() < 1e-7, "{}", line.value);
    let tiny = phi_hat(&params(1e-6, 1, 1), 2.0).unwrap();
    assert!((tiny + 0.5).abs() < 1e-6, "{tiny}");
    for s in [1.0, 2.0] {
        let space = phi_hat_oracle(&params(0.0, 1, 3), s, 1e-6).unwrap();
        assert!(rel(space.value, -8.0 * PI / s.powi(4)) < 1e-6, "s={s}: {}", space.value);
    }
}

#[test]
fn fallback_beyond_series_guard() {
    let p = params(1.0, 1, 1);
    let s = SERIES_GUARD + 5.0;
    assert!(phi_hat_series(&p, s).is_err());
    let v = phi_hat(&p, s).unwrap();
    assert!((v - multiquadric_transform(1.0, s)).abs() < 1e-6);
}

#[test]
fn series_and_oracle_agree() {
    for (n, d) in [(1, 1), (1, 3), (3, 1), (3, 3)] {
        for s in [0.5, 1.0, 2.0] {
            let p = params(1.0, d, n);
            let a = phi_hat_series(&p, s).unwrap();
            let b = phi_hat_oracle(&p, s, 1e-6).unwrap().value;
            assert!(rel(a, b) <= 1e-6, "(n,d)=({n},{d}) s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn series_rejects_bad_frequency() {
    let p = params(1.0, 1, 1);
    assert!(phi_hat_series(&p, 0.0).is_err());
    assert!(phi_hat_series(&p, -1.0).is_err());
}

fn poles(n: u32, d: u32, t_max: f64) -> Vec<(Rational64, u8)> {
    enumerate_poles(&params(1.0, d, n), t_max)
        .unwrap()
        .into_iter()
        .filter(|p| p.order > 0)
        .map(|p| (p.location, p.order))
        .collect()
}

fn r(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

#[test]
fn pole_examples() {
    assert_eq!(poles(1, 3, 1.0), vec![(r(-1, 2), 1), (r(1, 6), 1), (r(1, 2), 2), (r(5, 6), 1)]);
    assert_eq!(poles(1, 1, 1.0), vec![(r(-1, 2), 1), (r(1, 2), 2)]);
    assert_eq!(poles(2, 1, 1.0), vec![(r(-1, 2), 1), (r(1, 2), 1), (r(1, 1), 1)]);
}

#[test]
fn pole_set_sanity() {
    for d in [2, 4] {
        for n in 1..=3 {
            for p in enumerate_poles(&params(1.0, d, n), 3.0).unwrap() {
                let dt = p.location * Rational64::from_integer(i64::from(d));
                if dt.is_integer() && *dt.numer() <= 0 {
                    assert!(p.family == PoleFamily::Cancelled && p.order == 0, "{p:?}");
                }
            }
        }
    }
    for (n, d) in [(1, 1), (1, 3), (3, 1), (3, 3), (1, 5)] {
        let first = (f64::from(n) / (2.0 * f64::from(d)) - 0.5).ceil() + 0.5;
        let list = enumerate_poles(&params(1.0, d, n), first).unwrap();
        let doubles: Vec<_> = list.iter().filter(|p| p.order == 2).collect();
        assert_eq!(doubles.len(), 1, "(n,d)=({n},{d})");
        assert_eq!(doubles[0].location_f64(), first);
    }
}

#[test]
fn leading_term_cases() {
    let t = asymptotic_leading(&params(1.0, 3, 1)).unwrap();
    assert_eq!(t.case_tag, LeadingCase::DOddOrNoneven);
    assert_eq!(t.exponent, r(-4, 1));
    assert!(!t.log_flag);

    assert!(asymptotic_leading(&params(1.0, 2, 2)).unwrap().log_flag);

    let c = 1.3;
    let t = asymptotic_leading(&params(c, 2, 3)).unwrap();
    assert_eq!(t.exponent, r(-1, 1));
    assert!(rel(t.coefficient.abs(), PI * PI * c.powi(4)) < 1e-12);
}

#[test]
fn leading_term_dominates_near_zero() {
    for (n, d) in [(1, 3), (1, 2), (3, 2), (3, 1)] {
        let p = params(1.0, d, n);
        let t = asymptotic_leading(&p).unwrap();
        let s = 1e-3;
        assert!((phi_hat(&p, s).unwrap() / t.eval(1.0, s) - 1.0).abs() < 0.02, "(n,d)=({n},{d})");
    }
}

#[test]
fn expansion_exponents() {
    let shape = |n, d, m| -> Vec<(Rational64, bool)> {
        expansion_at_zero(&params(1.0, d, n), m).unwrap().iter().map(|t| (t.exponent, t.log_flag)).collect()
    };
    let int = |k| Rational64::from_integer(k);
    assert_eq!(shape(1, 3, 2), vec![(int(-4), false), (int(0), false), (int(2), false), (int(2), true)]);
    assert_eq!(shape(1, 1, 0), vec![(int(-2), false), (int(0), false), (int(0), true)]);
}

#[test]
fn expansion_leading_coefficient_matches_series() {
    let p = params(1.0, 3, 1);
    let a = expansion_at_zero(&p, 2).unwrap()[0].coefficient;
    let s = 1e-3;
    assert!(rel(phi_hat_series(&p, s).unwrap() * s.powi(4), a) < 0.01);
    assert!(rel(phi_hat_series(&p, 0.5).unwrap() * 0.5f64.powi(4), a) < 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_law(c in 0.3f64..3.0, s in 0.05f64..4.0, nd in prop::sample::select(vec![(1u32, 1u32), (1, 3), (3, 1), (3, 3)])) {
        let (n, d) = nd;
        prop_assume!(c * s <= SERIES_GUARD);
        let lhs = phi_hat(&params(c, d, n), s).unwrap();
        let rhs = c.powi((n + d) as i32) * phi_hat(&params(1.0, d, n), c * s).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn bessel_identity(cs in 0.1f64..10.0) {
        let v = phi_hat(&params(1.0, 1, 1), cs).unwrap();
        prop_assert!(rel(v, multiquadric_transform(1.0, cs)) < 1e-8);
    }
}
