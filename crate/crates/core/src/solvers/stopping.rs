use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// When a run stops.
///
/// Every run is additionally capped by `SolverConfig::max_iter` iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// First `k` with `‖Au_k − y^δ‖ < √τ δ` (strict).
    Discrepancy { tau: f64, delta: f64 },
    /// Fixed index `ceil(C/δ)`.
    APriori { constant: f64, delta: f64 },
    /// Exactly `K` iterates `u_0 … u_{K−1}`.
    MaxIter(usize),
    /// First `k` with `F(Au_k) < δ`.
    ModifiedDiscrepancy { delta: f64 },
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::Discrepancy { tau, delta } => {
                if !(delta > 0.0) {
                    return Err(Error::Config(format!("discrepancy rule needs δ > 0, got {delta}")));
                }
                if !(tau > 1.0) {
                    return Err(Error::Config(format!("discrepancy rule needs τ > 1, got {tau}")));
                }
            }
            StoppingRule::APriori { constant, delta } => {
                if !(delta > 0.0 && constant > 0.0) {
                    return Err(Error::Config(format!(
                        "a-priori rule needs C > 0 and δ > 0, got C = {constant}, δ = {delta}"
                    )));
                }
            }
            StoppingRule::MaxIter(k) => {
                if k == 0 {
                    return Err(Error::Config("max-iter rule needs K >= 1".into()));
                }
            }
            StoppingRule::ModifiedDiscrepancy { delta } => {
                if !(delta > 0.0) {
                    return Err(Error::Config(format!("modified discrepancy needs δ > 0, got {delta}")));
                }
            }
        }
        Ok(())
    }

    /// `ceil(C/δ)` for the a-priori rule.
    pub fn apriori_index(constant: f64, delta: f64) -> usize {
        (constant / delta).ceil() as usize
    }

    pub fn threshold(&self) -> Option<f64> {
        match *self {
            StoppingRule::Discrepancy { tau, delta } => Some(tau.sqrt() * delta),
            StoppingRule::ModifiedDiscrepancy { delta } => Some(delta),
            _ => None,
        }
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingRule::Discrepancy { tau, delta } => write!(f, "discrepancy(tau={tau}, delta={delta})"),
            StoppingRule::APriori { constant, delta } => write!(f, "apriori(C={constant}, delta={delta})"),
            StoppingRule::MaxIter(k) => write!(f, "maxiter({k})"),
            StoppingRule::ModifiedDiscrepancy { delta } => write!(f, "modified-discrepancy(delta={delta})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Discrepancy,
    APriori,
    ModifiedDiscrepancy,
    MaxIter,
}
