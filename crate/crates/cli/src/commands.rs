use gmq_core::error::{GmqError, Result};
use gmq_core::fit::log_space;
use gmq_core::harness::{
    conjecture_probe, convergence_study, decay_study, eval_points, pd_report, reproduction_test, ExperimentReport,
    SampleTable, EVAL_POINT_COUNT,
};
use gmq_core::lagrange::{psi_eval, LatticeSumSettings};
use gmq_core::specfun::{
    asymptotic_leading, eval_expansion, expansion_at_zero, phi_hat, phi_hat_oracle, SERIES_GUARD,
};
use gmq_core::symbol::{build_stencil, flatness_directions, flatness_order, Stencil};
use serde_json::json;

use crate::config::{parse_function, RunConfig};
use crate::Command;

/// Evaluation points in more than one dimension (desk scale).
const POINTS_3D: usize = 5;
const FLATNESS_DECADE: (f64, f64) = (1e-2, 1e-1);

pub struct Outcome {
    pub report: ExperimentReport,
    pub summary: String,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Fourier => fourier(cfg),
        Command::Asymp => asymp(cfg),
        Command::Expand => expand(cfg),
        Command::Coeffs => coeffs(cfg),
        Command::Psi => psi(cfg),
        Command::Decay => decay(cfg),
        Command::Reproduce => reproduce(cfg),
        Command::Converge => converge(cfg, false),
        Command::Conjecture => converge(cfg, true),
        Command::PdCheck => pd_check(cfg),
    }
}

fn new_report(tag: &str, cfg: &RunConfig) -> ExperimentReport {
    ExperimentReport::new(tag, cfg.params, cfg.echo())
}

fn stencil(cfg: &RunConfig) -> Result<Stencil> {
    build_stencil(&cfg.params, cfg.support, cfg.target)
}

fn lattice(cfg: &RunConfig) -> LatticeSumSettings {
    LatticeSumSettings::new(cfg.radius, cfg.tol, 0)
}

fn points(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let n = cfg.params.n as usize;
    eval_points(n, if n == 1 { EVAL_POINT_COUNT } else { POINTS_3D })
}

fn fourier(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let value = phi_hat(p, cfg.s)?;
    let mut report = new_report("fourier", cfg);
    report.report("phi_hat", json!(value));
    report.report(
        "method",
        json!(if p.c * cfg.s <= SERIES_GUARD { "residue series" } else { "quadrature oracle" }),
    );
    let mut summary = format!("phi_hat(s={}) = {value:.17e}", cfg.s);
    if p.n == 1 || p.n == 3 {
        let oracle = phi_hat_oracle(p, cfg.s, cfg.tol)?;
        let delta = (value - oracle.value) / oracle.value.abs().max(f64::MIN_POSITIVE);
        let mut t = SampleTable::new("oracle_eps_table", "epsilon", "regularized integral");
        for &(e, v) in &oracle.table {
            t.push("oracle", e, v, true);
        }
        report.tables.push(t);
        report.report("oracle_value", json!(oracle.value));
        report.report("oracle_error_estimate", json!(oracle.error_estimate));
        report.check("series vs oracle", delta.abs(), "relative |Δ| ≤ 1e-6".into(), delta.abs() <= 1e-6);
        summary.push_str(&format!("; oracle delta {delta:.3e}"));
    } else {
        report.warnings.push("no quadrature oracle for this dimension".into());
    }
    Ok(Outcome { report, summary })
}

fn asymp(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let lead = asymptotic_leading(p)?;
    let mut report = new_report("asymptotic", cfg);
    report.report("leading_term", json!(lead));
    let mut t = SampleTable::new("ratio", "s", "series / leading term");
    let grid = log_space(1e-3, 1e-1, 9);
    for &s in &grid {
        let ratio = phi_hat(p, s)? / lead.eval(p.c, s);
        t.push("ratio", s, ratio, true);
    }
    let last = t.rows[0].y;
    report.tables.push(t);
    report.check("ratio at s = 1e-3", last, "|ratio − 1| ≤ 0.02".into(), (last - 1.0).abs() <= 0.02);
    let summary = format!(
        "leading term {:?}: exponent {}, coefficient {:.6e}{}; ratio at s=1e-3 {last:.6}",
        lead.case_tag,
        lead.exponent,
        lead.coefficient,
        if lead.log_flag { " (log)" } else { "" }
    );
    Ok(Outcome { report, summary })
}

fn expand(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.params;
    // Terms of φ̂ that reach Ψ̂ = p φ̂ up to the target order; p starts at n + d.
    let max_order = i64::from(cfg.target) + 1 - i64::from(p.n + p.d);
    let terms = expansion_at_zero(p, max_order)?;
    let mut report = new_report("expansion", cfg);
    report.report("max_order", json!(max_order));
    report.report("terms", json!(terms));
    let s = 1e-3;
    let series = phi_hat(p, s)?;
    let approx = eval_expansion(&terms, p.c, s);
    let rel = ((approx - series) / series).abs();
    report.report("series_at_1e-3", json!(series));
    report.report("expansion_at_1e-3", json!(approx));
    report.check("expansion vs series at s = 1e-3", rel, "relative ≤ 0.01".into(), rel <= 0.01);
    let list: Vec<String> = terms
        .iter()
        .map(|t| format!("{}{}", t.exponent, if t.log_flag { "·log" } else { "" }))
        .collect();
    let summary = format!("exponents {{{}}}; relative deviation at s=1e-3 {rel:.3e}", list.join(", "));
    Ok(Outcome { report, summary })
}

fn coeffs(cfg: &RunConfig) -> Result<Outcome> {
    let st = stencil(cfg)?;
    let mut report = new_report("coeffs", cfg);
    report.provenance.stencil_hash = Some(st.hash());
    report.provenance.support_radius = Some(st.support_radius());
    let mut t = SampleTable::new("orbits", "orbit index", "weight");
    for (i, o) in st.orbits().iter().enumerate() {
        t.push("weight", i as f64, o.weight, true);
    }
    report.tables.push(t);
    report.report("stencil", serde_json::to_value(&st).expect("stencil serializes"));
    report.report("moment_order", json!(st.moment_order()));
    let resid = st.max_moment_residual();
    report.check("moment residual", resid, "≤ 1e-12".into(), resid <= 1e-12);
    let n = st.dim();
    let zero = vec![0i64; n];
    let mut first = zero.clone();
    first[0] = 1;
    for (label, at) in [("origin", zero), ("two_pi", first)] {
        let f = flatness_order(&st, &at, FLATNESS_DECADE)?;
        let mut t = SampleTable::new(&format!("flatness_{label}"), "|y − 2πj|", "|Ψ̂(y) − δ_j0|");
        for &(r, v) in &f.residual_curve {
            t.push("residual", r, v, true);
        }
        report.tables.push(t);
        report.report(&format!("flatness_{label}"), json!({ "pooled": f.fitted_order, "per_direction": f.per_direction }));
    }
    let summary = format!(
        "stencil support {} with {} orbits, moment order {}, moment residual {resid:.3e}",
        st.support_radius(),
        st.orbits().len(),
        st.moment_order()
    );
    Ok(Outcome { report, summary })
}

fn psi(cfg: &RunConfig) -> Result<Outcome> {
    let st = stencil(cfg)?;
    let mut report = new_report("psi", cfg);
    report.provenance.stencil_hash = Some(st.hash());
    report.provenance.support_radius = Some(st.support_radius());
    let n = st.dim();
    let mut t = SampleTable::new("psi", "r", "Ψ(r e₁)");
    for i in 0..=80 {
        let r = f64::from(i) * 0.25;
        let mut x = vec![0.0; n];
        x[0] = r;
        t.push("psi", r, psi_eval(&st, &x)?, true);
    }
    let mut at = vec![0.0; n];
    at[0] = cfg.s;
    let v = psi_eval(&st, &at)?;
    report.tables.push(t);
    report.report("psi_at_s", json!(v));
    Ok(Outcome {
        report,
        summary: format!("Psi(s e1) at s={} = {v:.17e}", cfg.s),
    })
}

fn decay(cfg: &RunConfig) -> Result<Outcome> {
    let st = stencil(cfg)?;
    let n = st.dim();
    let lo = f64::from(st.support_radius()) + 5.0;
    // Past the near field where Ψ still oscillates.
    let lo = if n == 1 { lo.max(50.0) } else { lo.max(20.0) };
    let hi = if n == 1 { lo * 100.0 } else { lo * 10f64.powf(1.5) };
    // In 3D: an axis, a face diagonal and a generic direction.
    let all = flatness_directions(n);
    let dirs: Vec<Vec<f64>> = if n == 3 {
        vec![all[0].clone(), all[3].clone(), all[5].clone()]
    } else {
        all.into_iter().take(1).collect()
    };
    // Rounding in the grid must not push the first radius below `lo`.
    let radii: Vec<f64> = log_space(lo, hi, 20).into_iter().map(|r| r.max(lo)).collect();
    let mut report = decay_study(&st, &dirs, &radii)?;
    let d = cfg.params.d;
    if cfg.target + 1 < 2 * d {
        report.warnings.push(format!(
            "target order {} is below 2d − 1 = {}; the expected slope for this stencil is −(n + target + 1) = {}",
            cfg.target,
            2 * d - 1,
            -(i64::from(cfg.params.n + cfg.target + 1))
        ));
    }
    let slopes: Vec<String> = report.fitted.iter().map(|f| format!("{:.4}", f.value)).collect();
    let summary = format!("decay slopes [{}] over r ∈ [{lo}, {hi:.0}]", slopes.join(", "));
    Ok(Outcome { report, summary })
}

fn reproduce(cfg: &RunConfig) -> Result<Outcome> {
    let st = stencil(cfg)?;
    let degrees: Vec<u32> = (0..2 * cfg.params.d).collect();
    let report = reproduction_test(&st, &degrees, &points(cfg), &lattice(cfg))?;
    let reproduced = report.reported.iter().find(|(k, _)| k == "reproduced_degrees").map(|(_, v)| v.to_string());
    let summary = format!("reproduced degrees {}", reproduced.unwrap_or_default());
    Ok(Outcome { report, summary })
}

fn converge(cfg: &RunConfig, probe: bool) -> Result<Outcome> {
    let st = stencil(cfg)?;
    let f = parse_function(&cfg.function).map_err(GmqError::invalid)?;
    let pts = points(cfg);
    let settings = lattice(cfg);
    let report = if probe {
        conjecture_probe(&st, &f, &cfg.h_list, &pts, &settings)?
    } else {
        convergence_study(&st, &f, &cfg.h_list, &pts, &settings)?
    };
    let order = report
        .fitted_value("order")
        .map_or("degenerate".to_string(), |o| format!("{o:.4}"));
    let summary = format!("fitted order {order} for {} (claimed: {})", cfg.function, 2 * cfg.params.d);
    Ok(Outcome { report, summary })
}

fn pd_check(cfg: &RunConfig) -> Result<Outcome> {
    let report = pd_report(&cfg.params, cfg.r)?;
    let t = report.table("eigenvalues").expect("eigenvalue table");
    let l1 = t.rows[0].y;
    let l2 = t.rows[2].y;
    Ok(Outcome {
        summary: format!("lambda1 = {l1:.17e}, lambda2 = {l2:.17e}"),
        report,
    })
}
