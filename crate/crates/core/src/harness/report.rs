use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fit::{fit_line, log_log_fit};
use crate::specfun::RbfParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    /// Whether the row enters the fits that reference its table.
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub rows: Vec<SampleRow>,
}

impl SampleTable {
    pub fn new(name: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            name: name.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, series: &str, x: f64, y: f64, used: bool) {
        self.rows.push(SampleRow {
            series: series.to_string(),
            x,
            y,
            used,
        });
    }

    fn points(&self, series: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.used && r.series == series)
            .map(|r| (r.x, r.y))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// Slope of log y against log x.
    LogLogSlope,
    /// Slope of y against x.
    LinearSlope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedQuantity {
    pub name: String,
    pub value: f64,
    pub uncertainty: f64,
    pub kind: FitKind,
    pub table: String,
    pub series: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance rule, e.g. "≥ 3.7" or "|x − 2| ≤ 0.2".
    pub rule: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub stencil_hash: Option<String>,
    pub support_radius: Option<u32>,
    pub settings: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: RbfParams,
    pub tables: Vec<SampleTable>,
    pub fitted: Vec<FittedQuantity>,
    /// Quantities reported without an acceptance rule.
    pub reported: Vec<(String, Value)>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(experiment: &str, params: RbfParams, settings: Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            params,
            tables: Vec::new(),
            fitted: Vec::new(),
            reported: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            provenance: Provenance {
                generator: format!("gmq-core {}", env!("CARGO_PKG_VERSION")),
                stencil_hash: None,
                support_radius: None,
                settings,
            },
        }
    }

    pub fn table(&self, name: &str) -> Option<&SampleTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Fits `series` of table `table` and records the result; `None` if
    /// fewer than two usable rows remain.
    pub fn add_fit(&mut self, name: &str, table: &str, series: &str, kind: FitKind) -> Option<f64> {
        let pts = self.table(table)?.points(series);
        let fit = refit(&pts, kind)?;
        self.fitted.push(FittedQuantity {
            name: name.to_string(),
            value: fit.0,
            uncertainty: fit.1,
            kind,
            table: table.to_string(),
            series: series.to_string(),
        });
        Some(fit.0)
    }

    pub fn fitted_value(&self, name: &str) -> Option<f64> {
        self.fitted.iter().find(|f| f.name == name).map(|f| f.value)
    }

    pub fn check(&mut self, name: &str, measured: f64, rule: String, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            measured,
            rule,
            pass,
        });
    }

    pub fn report(&mut self, name: &str, value: Value) {
        self.reported.push((name.to_string(), value));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Largest |stored − recomputed| over all fitted quantities.
    pub fn self_consistency(&self) -> f64 {
        self.fitted
            .iter()
            .map(|f| {
                let pts = self.table(&f.table).map(|t| t.points(&f.series)).unwrap_or_default();
                match refit(&pts, f.kind) {
                    Some((v, _)) if v == f.value => 0.0,
                    Some((v, _)) => (v - f.value).abs(),
                    None => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per raw sample. The header records the settings the report
    /// was produced from and the column meanings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let settings = serde_json::to_string(&self.provenance.settings).expect("settings serialize");
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        let _ = writeln!(out, "# config: {settings}");
        let _ = writeln!(
            out,
            "# columns: table name, series label, x (see table x_label), y (see table y_label), used in fit (1/0)"
        );
        for t in &self.tables {
            let _ = writeln!(out, "# table {}: x = {}, y = {}", t.name, t.x_label, t.y_label);
        }
        out.push_str("table,series,x,y,used\n");
        for t in &self.tables {
            for r in &t.rows {
                let _ = writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{}",
                    t.name,
                    r.series,
                    r.x,
                    r.y,
                    u8::from(r.used)
                );
            }
        }
        out
    }
}

fn refit(pts: &[(f64, f64)], kind: FitKind) -> Option<(f64, f64)> {
    match kind {
        FitKind::LogLogSlope => log_log_fit(pts).map(|f| (f.slope, f.slope_stderr)),
        FitKind::LinearSlope => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            fit_line(&xs, &ys).map(|f| (f.slope, f.slope_stderr))
        }
    }
}
