use crate::error::{Error, Result};
use crate::operators::Measurement;

/// Convex, differentiable data-fidelity term `F_y: Y → [0, ∞)` with `F_y(y) = 0`.
pub trait Fidelity: Send + Sync {
    fn name(&self) -> String;

    /// `F_y(w)`
    fn value(&self, w: &Measurement, y: &Measurement) -> Result<f64>;

    /// Riesz representative of `F_y'(w)` in the data-space pairing.
    fn gradient(&self, w: &Measurement, y: &Measurement) -> Result<Measurement>;
}

/// `½‖w − y‖²`
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadratic;

impl Fidelity for Quadratic {
    fn name(&self) -> String {
        "quadratic".into()
    }

    fn value(&self, w: &Measurement, y: &Measurement) -> Result<f64> {
        Ok(0.5 * w.sub(y)?.norm_sq())
    }

    fn gradient(&self, w: &Measurement, y: &Measurement) -> Result<Measurement> {
        w.sub(y)
    }
}

/// `½ Σ_j ω_j |w_j − y_j|²` in the data-space pairing; gradient `diag(ω)(w − y)`.
#[derive(Debug, Clone)]
pub struct WeightedQuadratic {
    omega: Vec<f64>,
}

impl WeightedQuadratic {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.iter().any(|o| !(*o >= 0.0 && o.is_finite())) {
            return Err(Error::Config("fidelity weights must be finite and nonnegative".into()));
        }
        Ok(Self { omega })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn max_weight(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }
}

impl Fidelity for WeightedQuadratic {
    fn name(&self) -> String {
        "weighted-quadratic".into()
    }

    fn value(&self, w: &Measurement, y: &Measurement) -> Result<f64> {
        let r = w.sub(y)?;
        Ok(0.5 * r.scale_entries(&self.omega)?.inner(&r)?)
    }

    fn gradient(&self, w: &Measurement, y: &Measurement) -> Result<Measurement> {
        w.sub(y)?.scale_entries(&self.omega)
    }
}
