use std::collections::BTreeMap;

use gmq_core::lagrange::{psi_decay_fit, psi_eval, quasi_interp, tail_bound, LatticeSumSettings, PsiEvaluator};
use gmq_core::specfun::RbfParams;
use gmq_core::symbol::{build_stencil, default_target_order, Stencil};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(c: f64, d: u32, n: u32) -> RbfParams {
    RbfParams::new(c, d, n).unwrap()
}

fn stencil(d: u32, n: u32) -> Stencil {
    let p = params(1.0, d, n);
    if n == 1 {
        build_stencil(&p, 48, default_target_order(&p)).unwrap()
    } else {
        build_stencil(&p, 4, 1).unwrap()
    }
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

#[test]
fn psi_at_origin() {
    let st = stencil(1, 1);
    assert!((psi_eval(&st, &[0.0]).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
}

#[test]
fn psi_is_even() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for st in [stencil(1, 1), stencil(3, 1), stencil(1, 3)] {
        for _ in 0..20 {
            let x: Vec<f64> = (0..st.dim()).map(|_| rng.random_range(-30.0..30.0)).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let (a, b) = (psi_eval(&st, &x).unwrap(), psi_eval(&st, &neg).unwrap());
            assert!((a - b).abs() <= 1e-13, "{x:?}");
        }
    }
}

#[test]
fn zero_shape_parameter_gives_polyharmonic_combination() {
    let base = stencil(3, 1);
    let st = Stencil::from_orbits(params(0.0, 3, 1), base.orbits().to_vec()).unwrap();
    for i in 0..40 {
        let x = -7.0 + 0.37 * f64::from(i);
        let direct: f64 = st.points().iter().map(|(k, w)| w * (x - k[0] as f64).abs().powi(3)).sum();
        assert!((psi_eval(&st, &[x]).unwrap() - direct).abs() <= 1e-12 * direct.abs().max(1.0), "x={x}");
    }
}

#[test]
fn far_field_matches_direct_sum() {
    for d in [1, 3] {
        let st = stencil(d, 1);
        let eval = PsiEvaluator::new(&st);
        for x in [60.0, 123.4, 400.0] {
            let (a, b) = (eval.eval(&[x]), eval.direct(&[x]));
            // The direct sum cancels terms of size x^d.
            assert!((a - b).abs() <= 1e-13 * x.powi(d as i32), "d={d} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn partition_of_unity() {
    let st = stencil(1, 1);
    // The a-priori tail bound is conservative; the budget is left loose and
    // the measured error is checked.
    let s = LatticeSumSettings::new(10_000, 1.0, 0);
    for x in [0.0, 0.13, 0.5, 0.91] {
        let v = quasi_interp(&st, &|_: &[i64]| 1.0, 1.0, &[x], &s).unwrap();
        assert!((v.value - 1.0).abs() <= 1e-8, "x={x}: {}", v.value);
        assert!((v.value - 1.0).abs() <= v.tail_estimate);
    }
    let st = stencil(1, 3);
    let s = LatticeSumSettings::new(24, 1.0, 0);
    let v = quasi_interp(&st, &|_: &[i64]| 1.0, 1.0, &[0.37, 0.11, 0.73], &s).unwrap();
    assert!((v.value - 1.0).abs() <= v.tail_estimate, "{v:?}");
}

#[test]
fn reproduces_linear_and_cubic_data() {
    let x = 0.37;
    let st = stencil(1, 1);
    let s = LatticeSumSettings::new(10_000, 1.0, 1);
    let v = quasi_interp(&st, &|j: &[i64]| j[0] as f64, 1.0, &[x], &s).unwrap();
    assert!((v.value - x).abs() <= 1e-8, "{}", v.value);

    let st = stencil(3, 1);
    let s = LatticeSumSettings::new(10_000, 1.0, 3);
    let v = quasi_interp(&st, &|j: &[i64]| (j[0] as f64).powi(3), 1.0, &[x], &s).unwrap();
    assert!((v.value - 0.050653).abs() <= 1e-6, "{}", v.value);
}

#[test]
fn reproduction_does_not_depend_on_grid_spacing() {
    let st = stencil(3, 1);
    let s = LatticeSumSettings::new(10_000, 1.0, 3);
    for h in [1.0, 0.5, 0.25] {
        for deg in 0..=3 {
            let f = move |j: &[i64]| (j[0] as f64 * h).powi(deg);
            for x in [0.2, 0.37, 0.81] {
                let v = quasi_interp(&st, &f, h, &[x], &s).unwrap();
                assert!((v.value - x.powi(deg)).abs() <= 1e-6, "h={h} deg={deg} x={x}: {}", v.value);
            }
        }
    }
}

#[test]
fn tail_bound_power_law() {
    let st = stencil(1, 1);
    let b = |r: u32, deg: u32| tail_bound(&st, &LatticeSumSettings::new(r, 1.0, deg)).unwrap();
    let ratio = b(1000, 0) / b(1414, 0);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    let ratio = b(1000, 1) / b(4000, 1);
    assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    let err = tail_bound(&st, &LatticeSumSettings::new(1000, 1.0, 2)).unwrap_err();
    assert!(err.to_string().contains("2d"), "{err}");
}

#[test]
fn unsatisfiable_tail_budget_is_an_error() {
    let st = stencil(1, 1);
    let e = quasi_interp(&st, &|_: &[i64]| 1.0, 1.0, &[0.3], &LatticeSumSettings::new(10, 1e-12, 0));
    assert!(e.is_err());
    let st = stencil(1, 3);
    let e = quasi_interp(&st, &|_: &[i64]| 1.0, 1.0, &[0.3, 0.3, 0.3], &LatticeSumSettings::new(61, 1.0, 0));
    assert!(e.is_err());
}

#[test]
fn decay_rates() {
    let radii = log_space(60.0, 6000.0, 20);
    for (d, want) in [(1, -3.0), (3, -7.0)] {
        let fit = psi_decay_fit(&stencil(d, 1), &[1.0], &radii).unwrap();
        assert!((fit.slope - want).abs() <= 0.3, "d={d}: {}", fit.slope);
        assert_eq!(fit.samples.len(), radii.len());
    }
    assert!(psi_decay_fit(&stencil(1, 1), &[1.0], &log_space(60.0, 600.0, 5)).is_err());
}

#[test]
fn decay_rates_in_three_dimensions() {
    // At target order t < 2d − 1 the first non-smooth term of Ψ̂ − 1 has
    // degree t + 1, so |Ψ| falls like r^{−(n + t + 1)}.
    let radii = log_space(20.0, 640.0, 20);
    let generic = [1.0, 2.0, 3.0];
    let mq = stencil(1, 3);
    let cubic = build_stencil(&params(1.0, 3, 3), 4, 3).unwrap();
    for (st, want) in [(&mq, -5.0), (&cubic, -7.0)] {
        for dir in [&[1.0, 0.0, 0.0][..], &generic[..]] {
            let fit = psi_decay_fit(st, dir, &radii).unwrap();
            assert!((fit.slope - want).abs() <= 0.3, "{dir:?}: {}", fit.slope);
        }
    }
}

#[test]
fn polyharmonic_control_decays_at_least_as_fast() {
    let base = stencil(1, 1);
    let st = Stencil::from_orbits(params(0.0, 1, 1), base.orbits().to_vec()).unwrap();
    let fit = psi_decay_fit(&st, &[1.0], &log_space(60.0, 6000.0, 20)).unwrap();
    assert!(fit.slope <= -3.0, "{}", fit.slope);
    if !fit.slope.is_finite() {
        assert!(fit.warning.is_some());
    }
}

#[test]
fn samplers_are_interchangeable_and_order_free() {
    let st = stencil(3, 1);
    let s = LatticeSumSettings::new(200, 1.0, 0);
    let f = |j: &[i64]| (0.1 * j[0] as f64).sin() * (-(j[0] as f64).powi(2) / 5000.0).exp();
    let closure = quasi_interp(&st, &f, 1.0, &[0.37], &s).unwrap();
    let mut keys: Vec<i64> = (-400..=400).collect();
    for seed in 0..3 {
        keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut table = BTreeMap::new();
        for &k in &keys {
            table.insert(vec![k], f(&[k]));
        }
        let v = quasi_interp(&st, &table, 1.0, &[0.37], &s).unwrap();
        assert_eq!(v.value.to_bits(), closure.value.to_bits());
        assert_eq!(v.tail_estimate.to_bits(), closure.tail_estimate.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_equivariance(x in -3.0f64..3.0, hexp in 0u32..4) {
        let st = stencil(3, 1);
        let h = 0.5f64.powi(hexp as i32);
        let s = LatticeSumSettings::new(300, 1.0, 0);
        let f = |t: f64| (-t * t / 8.0).exp();
        let shifted = |j: &[i64]| f((j[0] - 1) as f64 * h);
        let plain = |j: &[i64]| f(j[0] as f64 * h);
        let a = quasi_interp(&st, &shifted, h, &[x], &s).unwrap().value;
        let b = quasi_interp(&st, &plain, h, &[x - h], &s).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-13, "{a} vs {b}");
    }
}
