use gmq_core::harness::{
    conjecture_probe, convergence_study, decay_study, eval_points, pd_demo, pd_report, reproduction_test,
    ExperimentReport, TestFunction, EVAL_POINT_COUNT,
};
use gmq_core::lagrange::LatticeSumSettings;
use gmq_core::specfun::RbfParams;
use gmq_core::symbol::{build_stencil, default_target_order, Stencil};
use serde_json::{json, Value};

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

fn reported<'a>(r: &'a ExperimentReport, key: &str) -> &'a Value {
    &r.reported.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
}

fn octaves(count: i32) -> Vec<f64> {
    (0..count).map(|k| 0.5f64.powi(k)).collect()
}

#[test]
fn evaluation_points_are_fixed_and_off_lattice() {
    for n in [1, 3] {
        let a = eval_points(n, EVAL_POINT_COUNT);
        assert_eq!(a, eval_points(n, EVAL_POINT_COUNT));
        assert_eq!(a.len(), EVAL_POINT_COUNT);
        for p in &a {
            assert_eq!(p.len(), n);
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0), "{p:?}");
        }
    }
}

#[test]
fn multiquadric_reproduces_linear_polynomials() {
    let st = stencil(1, 1);
    let r = reproduction_test(&st, &[0, 1], &eval_points(1, 9), &LatticeSumSettings::new(10_000, 1.0, 0)).unwrap();
    assert_eq!(reported(&r, "reproduced_degrees"), &json!([0, 1]));
    assert!(r.all_pass());
    assert!(reproduction_test(&st, &[2], &eval_points(1, 3), &LatticeSumSettings::new(100, 1.0, 0)).is_err());
}

#[test]
fn cubic_reproduction_reports_missing_degrees() {
    let st = stencil(3, 1);
    let r = reproduction_test(&st, &[0, 1, 2, 3, 4, 5], &eval_points(1, 9), &LatticeSumSettings::new(10_000, 1.0, 0))
        .unwrap();
    assert_eq!(reported(&r, "reproduced_degrees"), &json!([0, 1, 2, 3]));
    assert_eq!(reported(&r, "not_reproduced_degrees"), &json!([4, 5]));
    assert_eq!(reported(&r, "claimed_max_degree"), &json!(5));
    assert!(r.all_pass());
}

#[test]
fn truncation_is_monotone_within_the_tail_bound() {
    let st = stencil(1, 1);
    let pts = eval_points(1, 9);
    let row = |r: &ExperimentReport, series: &str| {
        r.table("reproduction").unwrap().rows.iter().find(|x| x.series == series).unwrap().y
    };
    for deg in [0, 1] {
        let small = reproduction_test(&st, &[deg], &pts, &LatticeSumSettings::new(1000, 1.0, 0)).unwrap();
        let large = reproduction_test(&st, &[deg], &pts, &LatticeSumSettings::new(2000, 1.0, 0)).unwrap();
        assert!(row(&large, "residual") <= row(&small, "residual") + row(&small, "tail_estimate"));
    }
}

#[test]
fn convergence_report_is_self_consistent_and_deterministic() {
    let st = stencil(1, 1);
    let run = || {
        convergence_study(
            &st,
            &TestFunction::SinGauss,
            &octaves(5),
            &eval_points(1, 9),
            &LatticeSumSettings::new(2000, 1.0, 0),
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.self_consistency() <= 1e-12);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
    let order = a.fitted_value("order").unwrap();
    assert!(order > 1.2 && order < 2.2, "{order}");
    let fit = &a.fitted[0];
    let raw = a.table(&fit.table).unwrap().rows.iter().filter(|r| r.series == fit.series && r.used).count();
    assert_eq!(raw, 5);
    let parsed: Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(parsed["experiment"], "convergence");
}

#[test]
fn reproduced_polynomial_gives_degenerate_fit() {
    let st = stencil(1, 1);
    let r = convergence_study(
        &st,
        &TestFunction::Monomial { degree: 1 },
        &octaves(5),
        &eval_points(1, 5),
        &LatticeSumSettings::new(2000, 1.0, 1),
    )
    .unwrap();
    assert_eq!(reported(&r, "degenerate"), &json!(true));
    assert!(r.fitted_value("order").is_none());
}

#[test]
fn convergence_rejects_bad_spacings() {
    let st = stencil(1, 1);
    let s = LatticeSumSettings::new(100, 1.0, 0);
    let pts = eval_points(1, 3);
    assert!(convergence_study(&st, &TestFunction::Gaussian, &octaves(4), &pts, &s).is_err());
    let uneven = [1.0, 0.5, 0.2, 0.1, 0.05];
    assert!(convergence_study(&st, &TestFunction::Gaussian, &uneven, &pts, &s).is_err());
}

#[test]
fn conjecture_probe_verdicts() {
    let r = conjecture_probe(
        &stencil(1, 1),
        &TestFunction::Lorentzian,
        &octaves(5),
        &eval_points(1, 5),
        &LatticeSumSettings::new(2000, 1.0, 0),
    )
    .unwrap();
    assert_eq!(reported(&r, "verdict"), &json!("indistinguishable"));
    assert_eq!(reported(&r, "proven_exponent"), &json!(2));
    assert!(r.checks.is_empty());

    let r = conjecture_probe(
        &stencil(1, 3),
        &TestFunction::Gaussian,
        &octaves(5),
        &eval_points(3, 2),
        &LatticeSumSettings::new(10, 1e6, 0),
    )
    .unwrap();
    assert_eq!(reported(&r, "conjectured_exponent"), &json!(4));
    assert!(reported(&r, "resolution").as_str().unwrap().starts_with("coarse"));
}

#[test]
fn two_point_matrix_is_indefinite() {
    let d = pd_demo(&params(1.0, 1, 1), 1.0).unwrap();
    let s = 2f64.sqrt();
    assert!((d.eigenvalues[0] - (1.0 - s)).abs() <= 1e-14);
    assert!((d.eigenvalues[1] - (1.0 + s)).abs() <= 1e-14);
    assert!(d.max_deviation <= 1e-14);
    assert!(d.not_positive_definite);
    for deg in [1, 3] {
        let z = pd_demo(&params(0.0, deg, 1), 1.0).unwrap();
        assert_eq!(z.eigenvalues, [-1.0, 1.0]);
    }
    assert!(pd_report(&params(1.0, 3, 1), 2.5).unwrap().all_pass());
    assert!(pd_demo(&params(1.0, 1, 1), 0.0).is_err());
}

#[test]
fn decay_study_fits_every_direction() {
    let st = stencil(3, 1);
    let radii: Vec<f64> = (0..12).map(|i| 60.0 * 10f64.powf(f64::from(i) / 6.0)).collect();
    let r = decay_study(&st, &[vec![1.0], vec![-1.0]], &radii).unwrap();
    assert_eq!(r.fitted.len(), 2);
    for f in &r.fitted {
        assert!((f.value + 7.0).abs() <= 0.3, "{}", f.value);
    }
    assert!(r.self_consistency() <= 1e-12);
}
