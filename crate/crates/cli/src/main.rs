//! `gmq`: command-line front end for the generalized multiquadric toolkit.
//!
//! Precedence of settings: built-in defaults, then the `--config` JSON file,
//! then flags. Every run writes `report.json` (the resolved config and the
//! report) and `samples.csv` into `--out`.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gmq_core::error::GmqError;
use serde_json::json;

use config::{read_config_file, resolve, PartialConfig, PartialParams};

#[derive(Parser, Debug)]
#[command(name = "gmq", version, about = "Generalized multiquadric quasi-interpolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    d: Option<u32>,
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Frequency for `fourier`, evaluation distance for `psi`.
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Centre separation for `pd-check`.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Largest stencil support radius to try.
    #[arg(long, global = true)]
    support: Option<u32>,
    /// Target order of Ψ̂ − 1 at the origin.
    #[arg(long, global = true)]
    target: Option<u32>,
    /// Lattice truncation radius R.
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Comma-separated grid spacings, ratio 2.
    #[arg(long, global = true, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Oracle tolerance (`fourier`) or tail tolerance (lattice sums).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Test function: sin_gauss, lorentzian, gaussian or monomial_<k>.
    #[arg(long, global = true)]
    function: Option<String>,
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Exit with status 3 if any acceptance check fails.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Generalized Fourier transform φ̂(s) with an oracle cross-check.
    Fourier,
    /// Leading small-s term of φ̂.
    Asymp,
    /// Expansion of φ̂ at the origin.
    Expand,
    /// Quasi-Lagrange coefficients μ_k.
    Coeffs,
    /// Values of Ψ along the first axis.
    Psi,
    /// Decay rate of Ψ.
    Decay,
    /// Polynomial reproduction.
    Reproduce,
    /// Convergence order of Q_h f.
    Converge,
    /// Two-point interpolation matrix eigenvalues.
    PdCheck,
    /// Convergence order against the proven and conjectured exponents.
    Conjecture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fourier => "fourier",
            Command::Asymp => "asymp",
            Command::Expand => "expand",
            Command::Coeffs => "coeffs",
            Command::Psi => "psi",
            Command::Decay => "decay",
            Command::Reproduce => "reproduce",
            Command::Converge => "converge",
            Command::PdCheck => "pd-check",
            Command::Conjecture => "conjecture",
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn core_failure(e: &GmqError) -> ExitCode {
    let code = if e.is_numerical() { 2 } else { 1 };
    eprintln!("{}", json!({ "error": e }));
    ExitCode::from(code)
}

fn flags(cli: &Cli) -> PartialConfig {
    let params = (cli.c.is_some() || cli.d.is_some() || cli.n.is_some()).then_some(PartialParams {
        c: cli.c,
        d: cli.d,
        n: cli.n,
    });
    PartialConfig {
        command: None,
        params,
        s: cli.s,
        r: cli.r,
        support: cli.support,
        target: cli.target,
        radius: cli.radius,
        h_list: cli.h_list.clone(),
        tol: cli.tol,
        function: cli.function.clone(),
    }
}

fn write_outputs(dir: &Path, json_text: &str, csv: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), json_text)?;
    std::fs::write(dir.join("samples.csv"), csv)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("invalid_arguments", e.to_string().trim(), 1),
    };
    let file = match &cli.config {
        Some(path) => match read_config_file(path) {
            Ok(c) => c,
            Err(m) => return fail("invalid_config", &m, 1),
        },
        None => PartialConfig::default(),
    };
    let cfg = match resolve(cli.command, file.overlay(flags(&cli))) {
        Ok(c) => c,
        Err(m) => return fail("invalid_config", &m, 1),
    };
    let outcome = match commands::run(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => return core_failure(&e),
    };
    let doc = json!({ "config": cfg.echo(), "report": outcome.report });
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    if let Err(e) = write_outputs(&cli.out, &text, &outcome.report.to_csv()) {
        return fail("io", &format!("cannot write to {}: {e}", cli.out.display()), 1);
    }
    let failed: Vec<&str> = outcome
        .report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        println!("{}", outcome.summary);
    } else {
        println!("{} [failed checks: {}]", outcome.summary, failed.join("; "));
    }
    if cli.check && !failed.is_empty() {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
