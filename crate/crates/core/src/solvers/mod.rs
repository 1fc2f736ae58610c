//! Entropic Landweber iteration, its stochastic and general-fidelity
//! variants, EM and projected Landweber baselines, stopping rules and trace
//! diagnostics.

mod config;
mod diagnostics;
mod fidelity;
mod run;
mod state;
mod stopping;
pub mod trace;

pub use config::{Mode, SolverConfig, DEFAULT_EXPONENT_CLAMP};
pub use diagnostics::{
    check_monotonicity, fit_rate, log_log_slope, Check, MonotonicityReport, Violation, MONOTONICITY_SLACK,
};
pub use fidelity::{Fidelity, Quadratic, WeightedQuadratic};
pub use run::{run, IterationRecord, Method, Problem, RunError, RunOutcome};
pub use state::{em_step, projected_landweber_step, SolverState, StepReport, MASS_FLOOR};
pub use stopping::{StopReason, StoppingRule};
pub use trace::{read_trace_csv, write_trace_csv, TraceMeta};

#[cfg(test)]
mod tests;
