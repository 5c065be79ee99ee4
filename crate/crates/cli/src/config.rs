use std::path::Path;

use gmq_core::harness::TestFunction;
use gmq_core::specfun::RbfParams;
use gmq_core::symbol::{default_target_order, RADIUS_CAP_1D, RADIUS_CAP_3D};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Command;

/// Values read from a config file or flags; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<String>,
    pub params: Option<PartialParams>,
    pub s: Option<f64>,
    pub r: Option<f64>,
    pub support: Option<u32>,
    pub target: Option<u32>,
    pub radius: Option<u32>,
    pub h_list: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub function: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialParams {
    pub c: Option<f64>,
    pub d: Option<u32>,
    pub n: Option<u32>,
}

/// Fully resolved configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: RbfParams,
    pub s: f64,
    pub r: f64,
    pub support: u32,
    pub target: u32,
    pub radius: u32,
    pub h_list: Vec<f64>,
    pub tol: f64,
    pub function: String,
}

impl PartialConfig {
    /// Values from `other` win.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        let params = match (self.params, other.params) {
            (Some(a), Some(b)) => Some(PartialParams {
                c: b.c.or(a.c),
                d: b.d.or(a.d),
                n: b.n.or(a.n),
            }),
            (a, b) => b.or(a),
        };
        PartialConfig {
            command: other.command.or(self.command),
            params,
            s: other.s.or(self.s),
            r: other.r.or(self.r),
            support: other.support.or(self.support),
            target: other.target.or(self.target),
            radius: other.radius.or(self.radius),
            h_list: other.h_list.or(self.h_list),
            tol: other.tol.or(self.tol),
            function: other.function.or(self.function),
        }
    }
}

/// Reads a config document, or the `config` block of a report written
/// by an earlier run.
pub fn read_config_file(path: &Path) -> Result<PartialConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let value = match value {
        Value::Object(ref m) if m.contains_key("config") && m.contains_key("report") => m["config"].clone(),
        v => v,
    };
    serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_function(name: &str) -> Result<TestFunction, String> {
    match name {
        "sin_gauss" => Ok(TestFunction::SinGauss),
        "lorentzian" => Ok(TestFunction::Lorentzian),
        "gaussian" => Ok(TestFunction::Gaussian),
        other => other
            .strip_prefix("monomial_")
            .and_then(|k| k.parse().ok())
            .map(|degree| TestFunction::Monomial { degree })
            .ok_or_else(|| {
                format!("unknown test function {other:?}; expected sin_gauss, lorentzian, gaussian or monomial_<k>")
            }),
    }
}

/// Defaults: c = 1, d = 1, n = 1, s = 1, r = 1; support at the radius cap;
/// target 2d − 1 (capped before the first log term of φ̂); R = 10⁴ in 1D and
/// 40 otherwise; h = 2⁰..2⁻⁵ in 1D and 2⁰..2⁻⁴ otherwise; tol = 1e−6 for
/// `fourier` (oracle tolerance) and 1 for lattice sums (a-priori tail
/// bound); function sin_gauss.
pub fn resolve(cmd: Command, cfg: PartialConfig) -> Result<RunConfig, String> {
    let name = cmd.name();
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(format!("config is for command {c:?}, not {name:?}"));
        }
    }
    let p = cfg.params.unwrap_or_default();
    let params = RbfParams::new(p.c.unwrap_or(1.0), p.d.unwrap_or(1), p.n.unwrap_or(1)).map_err(|e| e.to_string())?;
    let one_d = params.n == 1;
    let support = cfg.support.unwrap_or(if one_d { RADIUS_CAP_1D } else { RADIUS_CAP_3D });
    let target = cfg.target.unwrap_or_else(|| default_target_order(&params));
    let radius = cfg.radius.unwrap_or(if one_d { 10_000 } else { 40 });
    let octaves = if one_d { 6 } else { 5 };
    let h_list = cfg
        .h_list
        .unwrap_or_else(|| (0..octaves).map(|k| 0.5f64.powi(k)).collect());
    let tol = cfg.tol.unwrap_or(if cmd == Command::Fourier { 1e-6 } else { 1.0 });
    let function = cfg.function.unwrap_or_else(|| "sin_gauss".to_string());
    parse_function(&function)?;
    let s = cfg.s.unwrap_or(1.0);
    let r = cfg.r.unwrap_or(1.0);
    if !(tol > 0.0) {
        return Err(format!("tol must be positive, got {tol}"));
    }
    if h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err("h_list entries must be positive".to_string());
    }
    Ok(RunConfig {
        command: name.to_string(),
        params,
        s,
        r,
        support,
        target,
        radius,
        h_list,
        tol,
        function,
    })
}

impl RunConfig {
    /// The echoed form, accepted back by `--config`.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
