//! Test problems: kernel integral equations on `(0,1)` and Fourier sampling
//! on `[-a, a]`, with their ground truths and synthetic noisy data.

mod data;
mod spec;
mod truth;

pub use data::{source_condition_residual, synthesize_data, SyntheticData};
pub use spec::{Experiment, MethodDefaults, OperatorSpec, ProblemSpec, StopKind, TruthSpec};
pub use truth::{
    band_limited_filter, truth_fourier, truth_kernel, FourierTruth, GaussianMixture, KERNEL_SIGMA_SQ,
    NEGATIVE_MASS_TOLERANCE,
};
