use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::ForwardOperator;

/// Default per-step bound on `|λ A*r|` before it is added to `ln u`.
pub const DEFAULT_EXPONENT_CLAMP: f64 = 500.0;

/// Side constraint on the iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Mode {
    /// `m = 0`: nonnegative iterates, no mass constraint.
    Unconstrained,
    /// `m = 1`: iterates are probability densities (`∫u = 1`).
    UnitMass,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::Unconstrained => 0,
            Mode::UnitMass => 1,
        }
    }
}

impl From<Mode> for u8 {
    fn from(m: Mode) -> u8 {
        m.index()
    }
}

impl TryFrom<u8> for Mode {
    type Error = Error;

    fn try_from(m: u8) -> Result<Mode> {
        match m {
            0 => Ok(Mode::Unconstrained),
            1 => Ok(Mode::UnitMass),
            other => Err(Error::Config(format!("mode must be 0 or 1, got {other}"))),
        }
    }
}

/// Step and stopping parameters shared by all solvers.
///
/// Only `λ` is stored; `c = 1/λ` is derived, so `λ·c = 1` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    pub lambda: f64,
    pub max_iter: usize,
    pub exponent_clamp: f64,
    /// Discrepancy parameter `τ > 1`.
    pub tau: f64,
    /// A-priori stopping constant: stop at `ceil(C/δ)`.
    pub apriori_constant: f64,
}

impl SolverConfig {
    pub fn new(mode: Mode, lambda: f64) -> Result<Self> {
        let cfg = Self {
            mode,
            lambda,
            max_iter: 1000,
            exponent_clamp: DEFAULT_EXPONENT_CLAMP,
            tau: 2.0,
            apriori_constant: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `λ = 1/‖A‖²`, i.e. `c = ‖A‖² = γ²/2`.
    pub fn for_operator(op: &dyn ForwardOperator, mode: Mode) -> Result<Self> {
        let norm = op.norm_estimate();
        if !(norm > 0.0) {
            return Err(Error::Config(format!("operator {} has zero norm", op.id())));
        }
        Self::new(mode, 1.0 / (norm * norm))
    }

    pub fn c(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_clamp(mut self, clamp: f64) -> Self {
        self.exponent_clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("step λ must be positive, got {}", self.lambda)));
        }
        if !(self.tau > 1.0) {
            return Err(Error::Config(format!("discrepancy τ must exceed 1, got {}", self.tau)));
        }
        if !(self.exponent_clamp > 0.0) {
            return Err(Error::Config(format!(
                "exponent clamp must be positive, got {}",
                self.exponent_clamp
            )));
        }
        if !(self.apriori_constant > 0.0) {
            return Err(Error::Config(format!(
                "a-priori constant must be positive, got {}",
                self.apriori_constant
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}
