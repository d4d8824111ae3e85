//! Configuration, experiment orchestration and report output for the
//! finite-N versus continuum convergence study.

mod config;
mod experiment;
mod fit;
mod report;

pub use config::{
    DiscretizationConfig, ExperimentConfig, Harmonic, IntegratorConfig, ModelConfig, ObservablesConfig, SimConfig,
    TruncationConfig,
};
pub use experiment::{
    continuum_reference, run_convergence_experiment, ConvergenceReport, ErrorRow, FitRow, SummaryRow,
};
pub use fit::{fit_scaling_exponent, ScalingFit};
pub use report::{emit_report, write_effective_config};
