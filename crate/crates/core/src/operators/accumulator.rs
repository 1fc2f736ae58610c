use super::{ForwardOperator, Measurement};
use crate::error::Result;
use crate::grid::Density;

/// Running sum `ỹ_k = Σ_{l<k} A u_l` of forward evaluations.
///
/// With it the k-th iterate of the unclamped entropic iteration has the
/// closed form `u_k = c̄ u₀ exp(λ A*(k y − ỹ_k))`, so each step costs one
/// forward evaluation regardless of `k`. Written for the Fourier sampler but
/// valid for any operator.
#[derive(Debug, Clone)]
pub struct FourierAccumulator {
    sums: Measurement,
    steps: usize,
}

impl FourierAccumulator {
    pub fn new(op: &dyn ForwardOperator) -> Self {
        Self {
            sums: op.zero_data(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sums(&self) -> &Measurement {
        &self.sums
    }

    /// `ỹ_{k+1} = ỹ_k + A u_k`
    pub fn step(&mut self, op: &dyn ForwardOperator, u_k: &Density) -> Result<()> {
        let au = op.apply(u_k)?;
        self.sums.add_assign(&au)?;
        self.steps += 1;
        Ok(())
    }

    /// Closed-form iterate after `steps()` updates, renormalized to unit mass
    /// when `unit_mass` is set.
    pub fn reconstruct(
        &self,
        op: &dyn ForwardOperator,
        u0: &Density,
        data: &Measurement,
        lambda: f64,
        unit_mass: bool,
    ) -> Result<Density> {
        let drive = data.combine(self.steps as f64, &self.sums, -1.0)?;
        let exponent = op.adjoint_values(&drive)?;
        let mut values: Vec<f64> = u0
            .values()
            .iter()
            .zip(&exponent)
            .map(|(u, e)| u * (lambda * e).exp())
            .collect();
        if unit_mass {
            let mass = u0.grid().integrate_values(&values);
            values.iter_mut().for_each(|v| *v /= mass);
        }
        Density::from_values(u0.grid(), values)
    }
}
