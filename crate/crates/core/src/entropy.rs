//! Boltzmann–Shannon entropy, Kullback–Leibler divergence and the surrogate functional D.

use std::fmt;

use crate::error::Result;
use crate::grid::{Density, GridFunction};
use crate::operators::ForwardOperator;

/// A real number or `+∞`. Never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn value(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// `s ln s` with `0 ln 0 = 0`.
fn s_log_s(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s * s.ln()
    }
}

/// `f(u) = ∫ u ln u`; `+∞` if any node is negative.
pub fn entropy(u: &GridFunction) -> Extended {
    if u.values().iter().any(|v| *v < 0.0) {
        return Extended::Infinite;
    }
    Extended::Finite(u.grid().integrate_values(&u.values().iter().map(|&s| s_log_s(s)).collect::<Vec<_>>()))
}

/// Pointwise KL integrand; `None` encodes `+∞`.
pub(crate) fn kl_term(v: f64, u: f64) -> Option<f64> {
    if v == 0.0 {
        Some(u)
    } else if u == 0.0 {
        None
    } else {
        Some(v * (v / u).ln() - v + u)
    }
}

/// `d(v,u) = ∫ v ln(v/u) − v + u`.
///
/// Nodes with `v = 0` contribute `u`; a node with `v > 0` and `u = 0` makes the
/// divergence `+∞`.
pub fn kl_divergence(v: &Density, u: &Density) -> Result<Extended> {
    v.check_same_grid(u)?;
    Ok(kl_values(v.grid().weights(), v.values(), u.values()))
}

pub(crate) fn kl_values(weights: &[f64], v: &[f64], u: &[f64]) -> Extended {
    let mut total = 0.0;
    for ((w, a), b) in weights.iter().zip(v).zip(u) {
        match kl_term(*a, *b) {
            Some(t) => total += w * t,
            None => return Extended::Infinite,
        }
    }
    Extended::Finite(total.max(0.0))
}

/// `(2/3‖v‖₁ + 4/3‖u‖₁)·d(v,u) − ‖u − v‖₁²`, nonnegative for every admissible pair.
pub fn l1_kl_bound_slack(v: &Density, u: &Density) -> Result<f64> {
    let d = kl_divergence(v, u)?.value();
    let factor = 2.0 / 3.0 * v.l1_norm() + 4.0 / 3.0 * u.l1_norm();
    let dist = v.l1_distance(u)?;
    if d.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(factor * d - dist * dist)
}

/// `D(u,v) = c·d(u,v) − ½‖Au − Av‖²`.
pub fn surrogate_d(u: &Density, v: &Density, op: &dyn ForwardOperator, c: f64) -> Result<Extended> {
    let d = kl_divergence(u, v)?;
    let Extended::Finite(d) = d else {
        return Ok(Extended::Infinite);
    };
    let gap = op.apply(u)?.sub(&op.apply(v)?)?;
    Ok(Extended::Finite(c * d - 0.5 * gap.norm_sq()))
}

/// `γ = √2 ‖A‖` with the L² operator norm from power iteration.
pub fn continuity_constant(op: &dyn ForwardOperator) -> f64 {
    std::f64::consts::SQRT_2 * op.norm_estimate()
}
