//! Forward operators `A: L¹(Ω) → Y` and their adjoints.
//!
//! Every operator maps grid functions on its [`Grid`] to a [`Measurement`] and
//! back. The adjoint is taken with respect to the weighted L² pairing on the
//! grid and the data-space pairing of the measurement, so that
//! `⟨Au, w⟩_Y = ⟨u, A*w⟩_Ω` holds up to rounding for every instance.

mod accumulator;
mod blocks;
mod fourier;
mod kernel;
mod matrix;
mod measurement;

use std::ops::Range;

pub use accumulator::FourierAccumulator;
pub use blocks::{partition_blocks, row_partition, OperatorBlock};
pub use fourier::{sample_frequencies, FourierSamplingOperator};
pub use kernel::{make_kernel_operator, KernelKind, KernelOperator};
pub use matrix::MatrixOperator;
pub use measurement::Measurement;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Iteration cap for [`power_iteration_norm`].
pub const POWER_ITERATIONS: usize = 200;
/// Relative change at which [`power_iteration_norm`] stops.
pub const POWER_TOLERANCE: f64 = 1e-10;

pub trait ForwardOperator: Send + Sync {
    /// Short identifier stamped into trace metadata.
    fn id(&self) -> String;

    fn domain(&self) -> &Grid;

    /// Zero element of the data space (fixes the length and weights).
    fn zero_data(&self) -> Measurement;

    /// `A u` on raw node values; `u.len()` must equal the domain size.
    fn apply_values(&self, u: &[f64]) -> Measurement;

    /// `A* w` on raw node values.
    fn adjoint_values(&self, w: &Measurement) -> Result<Vec<f64>>;

    /// Rows `rows` of `A u`.
    fn apply_rows(&self, u: &[f64], rows: Range<usize>) -> Result<Measurement> {
        self.apply_values(u).slice(rows)
    }

    /// `A_rows* w` where `w` lives on the rows `rows` of the data space.
    fn adjoint_rows(&self, w: &Measurement, rows: Range<usize>) -> Result<Vec<f64>> {
        let mut full = self.zero_data();
        full.add_into_rows(rows, w)?;
        self.adjoint_values(&full)
    }

    fn data_len(&self) -> usize {
        self.zero_data().len()
    }

    /// True when every kernel entry is nonnegative (required by EM).
    fn is_nonnegative(&self) -> bool {
        false
    }

    /// Operator norm from weighted L²(Ω) into the data space.
    fn norm_estimate(&self) -> f64 {
        power_iteration_norm(self)
    }

    fn apply(&self, u: &GridFunction) -> Result<Measurement> {
        if u.grid() != self.domain() {
            return Err(Error::GridMismatch(format!(
                "operator {} expects {:?}, got {:?}",
                self.id(),
                self.domain().spec(),
                u.grid().spec()
            )));
        }
        Ok(self.apply_values(u.values()))
    }

    fn adjoint(&self, w: &Measurement) -> Result<GridFunction> {
        GridFunction::new(self.domain().clone(), self.adjoint_values(w)?)
    }
}

/// Power iteration on `A*A` in weighted L²(Ω), started from the all-ones vector.
///
/// Returns the square root of the Rayleigh quotient once it changes by less
/// than [`POWER_TOLERANCE`] relative, or after [`POWER_ITERATIONS`] sweeps.
pub fn power_iteration_norm<O: ForwardOperator + ?Sized>(op: &O) -> f64 {
    let grid = op.domain();
    let mut x = vec![1.0; grid.len()];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let xx = grid.inner_values(&x, &x);
        if xx == 0.0 {
            return 0.0;
        }
        let ax = op.apply_values(&x);
        let y = op
            .adjoint_values(&ax)
            .expect("operator adjoint rejects its own output");
        let next = (grid.inner_values(&x, &y) / xx).max(0.0).sqrt();
        let yy = grid.inner_values(&y, &y).sqrt();
        let converged = (next - estimate).abs() <= POWER_TOLERANCE * next;
        estimate = next;
        if converged || yy == 0.0 {
            break;
        }
        x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / yy);
    }
    estimate
}

/// Norm of `A` as a map from L¹(Ω): the largest data-space norm of `A(e_i / w_i)`.
///
/// This is the constant for which `‖Au‖ ≤ ‖A‖ ‖u‖₁` holds on the grid.
pub fn l1_operator_norm<O: ForwardOperator + ?Sized>(op: &O) -> f64 {
    let grid = op.domain();
    let mut e = vec![0.0; grid.len()];
    let mut best: f64 = 0.0;
    for (i, w) in grid.weights().iter().enumerate() {
        e[i] = 1.0 / w;
        best = best.max(op.apply_values(&e).norm());
        e[i] = 0.0;
    }
    best
}

pub(crate) fn check_rows(rows: &Range<usize>, len: usize) -> Result<()> {
    if rows.start >= rows.end || rows.end > len {
        return Err(Error::SpaceMismatch(format!(
            "rows {rows:?} out of range for data of length {len}"
        )));
    }
    Ok(())
}
