use std::fmt;

use super::run::IterationRecord;
use crate::error::{Error, Result};

/// Relative slack of every monotonicity comparison.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// `‖Au_{k+1} − y‖ ≤ ‖Au_k − y‖`
    Residual,
    /// `D(z,u_{k+1}) ≤ D(z,u_k)` while `‖Au_{k+1} − y‖² > δ²`
    Fejer,
    /// `‖Au_k − y‖² ≤ δ² + 2D(z,u₀)/k`
    ResidualBound,
    /// `½‖Au_{k+1} − y‖² + D(z,u_{k+1}) + D(u_{k+1},u_k) ≤ δ²/2 + D(z,u_k)`
    Descent,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Residual => "residual increased",
            Check::Fejer => "D(z,u_k) increased",
            Check::ResidualBound => "residual bound exceeded",
            Check::Descent => "descent inequality violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub check: Check,
    /// Row index of the offending iterate.
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at k = {}: {} > {}", self.check, self.k, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub comparisons: usize,
    pub first_violation: Option<Violation>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn within(lhs: f64, rhs: f64) -> bool {
    if rhs == f64::INFINITY {
        return true;
    }
    if lhs == f64::INFINITY {
        return false;
    }
    lhs <= rhs + MONOTONICITY_SLACK * (1.0 + lhs.abs().max(rhs.abs()))
}

/// Checks the descent properties of a trace recorded against a known truth.
///
/// `D(u_{k+1},u_k)` enters the descent inequality only when the trace carries
/// it; traces read back from CSV are checked in the weaker form without it.
pub fn check_monotonicity(trace: &[IterationRecord], delta: f64) -> Result<MonotonicityReport> {
    let mut d = Vec::with_capacity(trace.len());
    for r in trace {
        match r.d_to_truth {
            Some(v) => d.push(v.value()),
            None => return Err(Error::Trace(format!("row k = {} has no D(z,u_k)", r.k))),
        }
    }
    if trace.is_empty() {
        return Err(Error::Trace("empty trace".into()));
    }
    let delta_sq = delta * delta;
    let d0 = d[0];
    let mut comparisons = 0;
    let mut found: Option<Violation> = None;
    let mut note = |v: Violation| {
        if found.is_none_or(|f| v.k < f.k) {
            found = Some(v);
        }
    };
    for i in 1..trace.len() {
        let (a, b) = (&trace[i - 1], &trace[i]);
        let k = b.k;
        comparisons += 3;
        if !within(b.residual, a.residual) {
            note(Violation { check: Check::Residual, k, lhs: b.residual, rhs: a.residual });
        }
        let res_sq = b.residual * b.residual;
        if res_sq > delta_sq {
            comparisons += 1;
            if !within(d[i], d[i - 1]) {
                note(Violation { check: Check::Fejer, k, lhs: d[i], rhs: d[i - 1] });
            }
        }
        let bound = delta_sq + 2.0 * d0 / k as f64;
        if !within(res_sq, bound) {
            note(Violation { check: Check::ResidualBound, k, lhs: res_sq, rhs: bound });
        }
        let step = b.d_step.map_or(0.0, |s| s.value());
        let lhs = 0.5 * res_sq + d[i] + step;
        let rhs = 0.5 * delta_sq + d[i - 1];
        if !within(lhs, rhs) {
            note(Violation { check: Check::Descent, k, lhs, rhs });
        }
    }
    Ok(MonotonicityReport { comparisons, first_violation: found })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::Trace(format!("need at least 5 points for a rate fit, got {}", points.len())));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && y.is_finite())) {
        return Err(Error::Trace(format!("cannot take logs of ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Trace("rate fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of `ln d(z,u_k)` against `ln k` over `k_min ≤ k ≤ k_max`.
pub fn fit_rate(trace: &[IterationRecord], k_min: usize, k_max: usize) -> Result<f64> {
    let mut points = Vec::new();
    for r in trace.iter().filter(|r| r.k >= k_min.max(1) && r.k <= k_max) {
        let d = r
            .kl_to_truth
            .ok_or_else(|| Error::Trace(format!("row k = {} has no d(z,u_k)", r.k)))?;
        points.push((r.k as f64, d.value()));
    }
    log_log_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::Extended;

    fn row(k: usize, residual: f64, d: f64) -> IterationRecord {
        IterationRecord {
            k,
            residual,
            kl_to_truth: Some(Extended::Finite(d)),
            d_to_truth: Some(Extended::Finite(d)),
            l1_error: None,
            mass: 1.0,
            ln_ck: None,
            clamp_events: 0,
            d_step: None,
            fidelity: None,
        }
    }

    #[test]
    fn exact_power_law() {
        let trace: Vec<_> = (0..=100).map(|k| row(k, 0.0, 1.0 / k.max(1) as f64)).collect();
        assert!((fit_rate(&trace, 10, 100).unwrap() + 1.0).abs() < 1e-12);
        let flat: Vec<_> = (0..=100).map(|k| row(k, 0.0, 0.3)).collect();
        assert!(fit_rate(&flat, 10, 100).unwrap().abs() < 1e-12);
        assert!(fit_rate(&trace, 10, 13).is_err());
    }

    #[test]
    fn detects_bumped_residual() {
        let mut trace: Vec<_> = (0..20).map(|k| row(k, 0.1 / (k + 1) as f64, 1.0 / (k + 1) as f64)).collect();
        assert!(check_monotonicity(&trace, 0.0).unwrap().passed());
        trace[7].residual = 0.5;
        let v = check_monotonicity(&trace, 0.0).unwrap().first_violation.unwrap();
        assert_eq!(v.k, 7);
        assert_eq!(v.check, Check::Residual);
    }

    #[test]
    fn rejects_trace_without_d() {
        let mut trace = vec![row(0, 1.0, 1.0), row(1, 0.5, 0.5)];
        trace[1].d_to_truth = None;
        assert!(check_monotonicity(&trace, 0.0).is_err());
    }
}
