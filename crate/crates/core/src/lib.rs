//! Entropic Landweber iteration for linear ill-posed problems with
//! nonnegative (or probability density) solutions.
//!
//! Functions on an interval are sampled on a uniform [`Grid`] with trapezoid
//! weights; forward operators map them to a [`Measurement`] in a weighted
//! real or complex data space. The [`solvers`] module iterates, stops and
//! records traces; [`experiments`] builds the kernel and Fourier test problems.

pub mod entropy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod operators;
pub mod solvers;

pub use entropy::{continuity_constant, entropy, kl_divergence, l1_kl_bound_slack, surrogate_d, Extended};
pub use error::{Error, Result};
pub use grid::{Density, Grid, GridFunction, GridSpec};
pub use operators::{ForwardOperator, Measurement};
pub use solvers::{
    run, IterationRecord, Method, Mode, Problem, RunOutcome, SolverConfig, SolverState, StopReason,
    StoppingRule,
};
