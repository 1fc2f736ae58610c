use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, SolverConfig};
use super::fidelity::Fidelity;
use crate::error::{Error, Result};
use crate::grid::Density;
use crate::operators::{ForwardOperator, Measurement, OperatorBlock};

/// Below this the unit-mass renormalization is refused.
pub const MASS_FLOOR: f64 = 1e-300;

/// What one multiplicative step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// `ln c_k` (zero for `m = 0`).
    pub ln_c: f64,
    /// Nodes whose exponent hit the clamp.
    pub clamp_events: usize,
    /// `‖y − Au_k‖` evaluated before the step.
    pub residual: f64,
    /// Block drawn by the stochastic variant.
    pub block: Option<usize>,
}

/// Iterate of the entropic schemes, kept in log space.
#[derive(Debug, Clone)]
pub struct SolverState {
    k: usize,
    u: Density,
    log_u: Vec<f64>,
    log_u0: Vec<f64>,
    v_accum: Measurement,
    w0: Measurement,
    log_normalizer_sum: f64,
    last_residual: f64,
    clamp_events: usize,
    rng: Option<ChaCha8Rng>,
}

impl SolverState {
    /// Starts from a strictly positive `u0` with `w₀ = 0`.
    pub fn new(u0: Density, op: &dyn ForwardOperator) -> Result<Self> {
        if u0.grid() != op.domain() {
            return Err(Error::GridMismatch(format!(
                "initial iterate has {} nodes, operator {} expects {}",
                u0.len(),
                op.id(),
                op.domain().len()
            )));
        }
        if let Some((index, &value)) = u0.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Domain { index, value, expected: "strictly positive initial iterate" });
        }
        let log_u: Vec<f64> = u0.values().iter().map(|v| v.ln()).collect();
        let w0 = op.zero_data();
        Ok(Self {
            k: 0,
            u: u0,
            log_u0: log_u.clone(),
            log_u,
            v_accum: w0.clone(),
            w0,
            log_normalizer_sum: 0.0,
            last_residual: f64::NAN,
            clamp_events: 0,
            rng: None,
        })
    }

    /// Attaches the block-selection stream of the stochastic variant.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u(&self) -> &Density {
        &self.u
    }

    pub fn into_density(self) -> Density {
        self.u
    }

    pub fn log_u(&self) -> &[f64] {
        &self.log_u
    }

    pub fn v_accum(&self) -> &Measurement {
        &self.v_accum
    }

    pub fn w0(&self) -> &Measurement {
        &self.w0
    }

    pub fn log_normalizer_sum(&self) -> f64 {
        self.log_normalizer_sum
    }

    pub fn last_residual(&self) -> f64 {
        self.last_residual
    }

    /// Total clamp events over all steps so far.
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    /// `ln u₀ + Σ ln c_j + λ A*(v_k − w₀)`, the dual form of the iterate.
    pub fn reconstruct_log(&self, op: &dyn ForwardOperator, lambda: f64) -> Result<Vec<f64>> {
        let drive = op.adjoint_values(&self.v_accum.sub(&self.w0)?)?;
        Ok(self
            .log_u0
            .iter()
            .zip(&drive)
            .map(|(l0, a)| l0 + self.log_normalizer_sum + lambda * a)
            .collect())
    }

    /// `u_{k+1} = u_k c_k^m e^{λA*(y − Au_k)}`
    pub fn entropic_step(
        &mut self,
        op: &dyn ForwardOperator,
        y: &Measurement,
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let au = op.apply(&self.u)?;
        self.entropic_step_with(op, y, &au, cfg)
    }

    /// As [`entropic_step`](Self::entropic_step) with `Au_k` already evaluated.
    pub(crate) fn entropic_step_with(
        &mut self,
        op: &dyn ForwardOperator,
        y: &Measurement,
        au: &Measurement,
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let r = y.sub(au)?;
        let exponent: Vec<f64> = op.adjoint_values(&r)?.into_iter().map(|a| cfg.lambda * a).collect();
        let residual = r.norm();
        self.advance(exponent, &r, residual, None, cfg)
    }

    /// Draws `J(k)` uniformly from the state's stream and applies the block step.
    pub fn stochastic_entropic_step(
        &mut self,
        blocks: &[(OperatorBlock<'_>, Measurement)],
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let m = blocks.len();
        let rng = self
            .rng
            .as_mut()
            .ok_or_else(|| Error::Config("stochastic step needs a seeded state".into()))?;
        if m == 0 {
            return Err(Error::Config("no operator blocks".into()));
        }
        let j = rng.random_range(0..m);
        self.block_step(blocks, j, cfg)
    }

    /// `u_{k+1} = u_k c_k^m e^{λ M A_J*(y_J − A_J u_k)}` for a given block `J` (0-based).
    pub fn block_step(
        &mut self,
        blocks: &[(OperatorBlock<'_>, Measurement)],
        j: usize,
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let m = blocks.len();
        let (block, y_j) = blocks
            .get(j)
            .ok_or_else(|| Error::Config(format!("block {j} out of range for {m} blocks")))?;
        let r_j = y_j.sub(&block.apply(&self.u)?)?;
        let scale = cfg.lambda * m as f64;
        let exponent: Vec<f64> = block.adjoint_values(&r_j)?.into_iter().map(|a| scale * a).collect();
        let mut increment = self.v_accum.zeros_like();
        increment.add_into_rows(block.rows(), &r_j.scaled(m as f64))?;
        let residual = r_j.norm();
        self.advance(exponent, &increment, residual, Some(j), cfg)
    }

    /// `u_{k+1} = u_k c_k^m e^{−λA*F'(Au_k)}`
    pub fn general_fidelity_step(
        &mut self,
        op: &dyn ForwardOperator,
        y: &Measurement,
        fid: &dyn Fidelity,
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let au = op.apply(&self.u)?;
        let g = fid.gradient(&au, y)?;
        let exponent: Vec<f64> = op.adjoint_values(&g)?.into_iter().map(|a| -cfg.lambda * a).collect();
        let residual = y.sub(&au)?.norm();
        self.advance(exponent, &g.neg(), residual, None, cfg)
    }

    fn advance(
        &mut self,
        mut exponent: Vec<f64>,
        dual_increment: &Measurement,
        residual: f64,
        block: Option<usize>,
        cfg: &SolverConfig,
    ) -> Result<StepReport> {
        let bound = cfg.exponent_clamp;
        let mut clamps = 0;
        for (index, e) in exponent.iter_mut().enumerate() {
            if e.abs() > bound {
                *e = e.clamp(-bound, bound);
                clamps += 1;
            }
            if !e.is_finite() {
                return Err(Error::NonFiniteExponent { step: self.k, index });
            }
        }
        let mut next: Vec<f64> = self.log_u.iter().zip(&exponent).map(|(l, e)| l + e).collect();
        let ln_c = match cfg.mode {
            Mode::Unconstrained => 0.0,
            Mode::UnitMass => {
                // log-sum-exp keeps the mass finite when the exponent is large
                let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let scaled: Vec<f64> = next.iter().map(|l| (l - top).exp()).collect();
                let log_mass = top + self.u.grid().integrate_values(&scaled).ln();
                if !(log_mass >= MASS_FLOOR.ln()) {
                    return Err(Error::MassUnderflow { step: self.k, mass: log_mass.exp() });
                }
                next.iter_mut().for_each(|l| *l -= log_mass);
                -log_mass
            }
        };
        let values: Vec<f64> = next.iter().map(|l| l.exp()).collect();
        // u may underflow to zero; log_u stays authoritative
        if let Some((index, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteExponent { step: self.k, index });
        }
        self.u = Density::from_values(self.u.grid(), values)?;
        self.log_u = next;
        self.v_accum.add_assign(dual_increment)?;
        self.log_normalizer_sum += ln_c;
        self.last_residual = residual;
        self.clamp_events += clamps;
        self.k += 1;
        Ok(StepReport { ln_c, clamp_events: clamps, residual, block })
    }
}

/// `u_{k+1} = u_k · A*(y/Au_k) / A*1`, with `0/0` data ratios taken as zero.
pub fn em_step(u: &Density, y: &Measurement, op: &dyn ForwardOperator) -> Result<Density> {
    if !op.is_nonnegative() {
        return Err(Error::EmUndefined(format!("operator {} has negative entries", op.id())));
    }
    let au = op.apply(u)?;
    au.check_same_space(y)?;
    let (Some(yv), Some(av)) = (y.real_values(), au.real_values()) else {
        return Err(Error::EmUndefined("EM needs real-valued data".into()));
    };
    let mut ratio = Vec::with_capacity(yv.len());
    for (j, (&yj, &aj)) in yv.iter().zip(av).enumerate() {
        if yj < 0.0 {
            return Err(Error::EmUndefined(format!("negative datum {yj} at sample {j}")));
        }
        ratio.push(if yj == 0.0 {
            0.0
        } else if aj > 0.0 {
            yj / aj
        } else {
            return Err(Error::EmUndefined(format!("(Au)_{j} = {aj} while y_{j} = {yj} > 0")));
        });
    }
    let weights: std::sync::Arc<[f64]> = y.weights().expect("real data carries weights").into();
    let back = op.adjoint_values(&Measurement::real(weights.clone(), ratio)?)?;
    let ones = op.adjoint_values(&Measurement::real(weights, vec![1.0; yv.len()])?)?;
    let mut values = Vec::with_capacity(back.len());
    for (i, ((ui, bi), oi)) in u.values().iter().zip(&back).zip(&ones).enumerate() {
        if !(*oi > 0.0) {
            return Err(Error::EmUndefined(format!("(A*1)_{i} = {oi} is not positive")));
        }
        values.push(ui * bi / oi);
    }
    Density::from_values(u.grid(), values)
}

/// `u_{k+1} = (u_k − τ A*(Au_k − y))₊`
pub fn projected_landweber_step(
    u: &Density,
    y: &Measurement,
    op: &dyn ForwardOperator,
    step: f64,
) -> Result<Density> {
    if !(step > 0.0) {
        return Err(Error::Config(format!("projected Landweber step must be positive, got {step}")));
    }
    let r = op.apply(u)?.sub(y)?;
    let g = op.adjoint_values(&r)?;
    let values = u.values().iter().zip(&g).map(|(ui, gi)| (ui - step * gi).max(0.0)).collect();
    Density::from_values(u.grid(), values)
}
