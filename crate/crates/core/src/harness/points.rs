use serde::{Deserialize, Serialize};

/// Number of evaluation points used by the experiments.
pub const EVAL_POINT_COUNT: usize = 33;
const SEQUENCE_SEED: f64 = 0.5;

/// The generalized golden ratio: the positive root of x^{n+1} = x + 1.
fn phi_n(n: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (n as f64 + 1.0));
    }
    x
}

/// Additive recurrence (R_n) sequence in [0,1)ⁿ with a fixed seed.
pub fn eval_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    let g = phi_n(n);
    let alpha: Vec<f64> = (1..=n).map(|k| g.powi(-(k as i32))).collect();
    (1..=count)
        .map(|i| {
            alpha
                .iter()
                .map(|a| (SEQUENCE_SEED + i as f64 * a).fract())
                .collect()
        })
        .collect()
}

/// Smooth bounded test functions with bounded derivatives, plus monomials
/// for reproduction runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    /// sin(x₁)·e^{−‖x‖²/50}
    SinGauss,
    /// (1 + ‖x‖²)^{−1}
    Lorentzian,
    /// e^{−‖x‖²/8}
    Gaussian,
    /// x₁^degree
    Monomial { degree: u32 },
}

impl TestFunction {
    pub const SUITE: [TestFunction; 3] = [TestFunction::SinGauss, TestFunction::Lorentzian, TestFunction::Gaussian];

    pub fn name(&self) -> String {
        match self {
            TestFunction::SinGauss => "sin_gauss".into(),
            TestFunction::Lorentzian => "lorentzian".into(),
            TestFunction::Gaussian => "gaussian".into(),
            TestFunction::Monomial { degree } => format!("monomial_{degree}"),
        }
    }

    /// Growth degree, for the lattice-sum tail bound.
    pub fn degree(&self) -> u32 {
        match self {
            TestFunction::Monomial { degree } => *degree,
            _ => 0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            TestFunction::SinGauss => x[0].sin() * (-r2 / 50.0).exp(),
            TestFunction::Lorentzian => 1.0 / (1.0 + r2),
            TestFunction::Gaussian => (-r2 / 8.0).exp(),
            TestFunction::Monomial { degree } => x[0].powi(*degree as i32),
        }
    }
}
