//! Experiments behind the decay, reproduction, convergence and
//! positive-definiteness checks, with self-contained reports.

mod experiments;
mod points;
mod report;

pub use experiments::{
    conjecture_probe, convergence_study, decay_study, expected_reproduction_degree, pd_demo, pd_report,
    reproduction_test, PdDemo,
};
pub use points::{eval_points, TestFunction, EVAL_POINT_COUNT};
pub use report::{Check, ExperimentReport, FitKind, FittedQuantity, Provenance, SampleRow, SampleTable};
