use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::{synthesize_data, SyntheticData};
use super::truth::{truth_fourier, truth_kernel, FourierTruth};
use crate::error::{Error, Result};
use crate::grid::{Density, GridFunction};
use crate::operators::{make_kernel_operator, FourierSamplingOperator, ForwardOperator, KernelKind};
use crate::solvers::{Method, Mode, Problem, SolverConfig, StoppingRule, WeightedQuadratic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Kernel { kernel: KernelKind, n_in: usize, n_out: usize },
    Fourier { a: f64, n_grid: usize, n_freq: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSpec {
    Z1Kernel,
    Z2Kernel,
    Z3Kernel,
    Z1Fourier,
    Z1FourierLinear,
    Z2Fourier,
    /// Two-column `node,value` CSV on the operator grid, relative to the config file.
    Custom(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    Discrepancy,
    Apriori,
    Maxiter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodDefaults {
    pub mode: Mode,
    /// `λ`; `None` means `1/‖A‖²`.
    pub lambda_step: Option<f64>,
    /// Discrepancy parameter `τ`.
    pub tau_disc: f64,
    /// Constant initial iterate; `None` means 1 for `m = 0` and `1/|Ω|` for `m = 1`.
    pub initial_value: Option<f64>,
    pub max_iter: usize,
    pub apriori_constant: f64,
    pub blocks: usize,
    pub stop: StopKind,
    /// Projected Landweber step; `None` means the entropic `λ`.
    pub pl_step: Option<f64>,
    /// `ω` of the weighted quadratic fidelity; `None` means all ones.
    pub fidelity_weights: Option<Vec<f64>>,
}

impl Default for MethodDefaults {
    fn default() -> Self {
        Self {
            mode: Mode::Unconstrained,
            lambda_step: None,
            tau_disc: 2.0,
            initial_value: None,
            max_iter: 500,
            apriori_constant: 1.0,
            blocks: 4,
            stop: StopKind::Maxiter,
            pl_step: None,
            fidelity_weights: None,
        }
    }
}

/// One experiment as stored in a JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub id: String,
    pub operator: OperatorSpec,
    pub truth: TruthSpec,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub defaults: MethodDefaults,
}

/// A built problem: operator, truth, data and solver settings.
pub struct Experiment {
    pub spec: ProblemSpec,
    pub op: Box<dyn ForwardOperator>,
    pub truth: Density,
    pub data: SyntheticData,
    pub initial: Density,
    pub cfg: SolverConfig,
}

impl ProblemSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise_sigma must be nonnegative, got {}", self.noise_sigma)));
        }
        if self.id.is_empty() {
            return Err(Error::Config("problem id is empty".into()));
        }
        let fourier = matches!(self.operator, OperatorSpec::Fourier { .. });
        let fourier_truth = matches!(
            self.truth,
            TruthSpec::Z1Fourier | TruthSpec::Z1FourierLinear | TruthSpec::Z2Fourier
        );
        let kernel_truth = matches!(self.truth, TruthSpec::Z1Kernel | TruthSpec::Z2Kernel | TruthSpec::Z3Kernel);
        if (fourier && kernel_truth) || (!fourier && fourier_truth) {
            return Err(Error::Config(format!("truth {:?} does not fit operator {:?}", self.truth, self.operator)));
        }
        Ok(())
    }

    /// Builds everything; `base` resolves relative custom-truth paths.
    pub fn build(&self, base: Option<&Path>) -> Result<Experiment> {
        self.validate()?;
        let op: Box<dyn ForwardOperator> = match self.operator {
            OperatorSpec::Kernel { kernel, n_in, n_out } => Box::new(make_kernel_operator(kernel, n_in, n_out)?),
            OperatorSpec::Fourier { a, n_grid, n_freq } => {
                Box::new(FourierSamplingOperator::uniform(a, n_grid, n_freq)?)
            }
        };
        let grid = op.domain().clone();
        let truth = match &self.truth {
            TruthSpec::Z1Kernel => truth_kernel(1, &grid)?,
            TruthSpec::Z2Kernel => truth_kernel(2, &grid)?,
            TruthSpec::Z3Kernel => truth_kernel(3, &grid)?,
            TruthSpec::Z1Fourier | TruthSpec::Z1FourierLinear | TruthSpec::Z2Fourier => {
                let OperatorSpec::Fourier { a, n_grid, n_freq } = self.operator else {
                    unreachable!("checked in validate")
                };
                let fop = FourierSamplingOperator::uniform(a, n_grid, n_freq)?;
                let which = match self.truth {
                    TruthSpec::Z1Fourier => FourierTruth::Z1,
                    TruthSpec::Z1FourierLinear => FourierTruth::Z1Linear,
                    _ => FourierTruth::Z2,
                };
                truth_fourier(which, &fop)?
            }
            TruthSpec::Custom(path) => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let f = GridFunction::read_csv(&grid, std::fs::File::open(&full)?)?;
                Density::new(f)?
            }
        };
        let d = &self.defaults;
        let mut mode = d.mode;
        if matches!(self.operator, OperatorSpec::Fourier { .. }) && (truth.mass() - 1.0).abs() < 1e-6 {
            mode = Mode::UnitMass;
        }
        let lambda = match d.lambda_step {
            Some(l) => l,
            None => {
                let norm = op.norm_estimate();
                1.0 / (norm * norm)
            }
        };
        let mut cfg = SolverConfig::new(mode, lambda)?.with_tau(d.tau_disc).with_max_iter(d.max_iter);
        cfg.apriori_constant = d.apriori_constant;
        cfg.validate()?;
        let initial_value = match (d.initial_value, mode) {
            (Some(v), _) => v,
            (None, Mode::Unconstrained) => 1.0,
            (None, Mode::UnitMass) => 1.0 / grid.length(),
        };
        let initial = Density::constant(&grid, initial_value)?;
        if !initial.is_strictly_positive() {
            return Err(Error::Config(format!("initial value must be positive, got {initial_value}")));
        }
        let data = synthesize_data(op.as_ref(), &truth, self.noise_sigma, self.seed)?;
        Ok(Experiment { spec: self.clone(), op, truth, data, initial, cfg })
    }
}

impl Experiment {
    pub fn problem(&self) -> Problem<'_> {
        Problem { op: self.op.as_ref(), data: self.data.noisy.clone(), initial: self.initial.clone() }
    }

    /// The configured stopping rule with `δ` the realized noise norm unless overridden.
    pub fn stopping_rule(&self, kind: StopKind, delta: Option<f64>) -> Result<StoppingRule> {
        let delta = delta.unwrap_or(self.data.delta);
        let rule = match kind {
            StopKind::Discrepancy => StoppingRule::Discrepancy { tau: self.cfg.tau, delta },
            StopKind::Apriori => StoppingRule::APriori { constant: self.cfg.apriori_constant, delta },
            StopKind::Maxiter => StoppingRule::MaxIter(self.cfg.max_iter),
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn pl_step(&self) -> f64 {
        self.spec.defaults.pl_step.unwrap_or(self.cfg.lambda)
    }

    pub fn fidelity(&self) -> Result<WeightedQuadratic> {
        let n = self.op.data_len();
        let omega = self.spec.defaults.fidelity_weights.clone().unwrap_or_else(|| vec![1.0; n]);
        if omega.len() != n {
            return Err(Error::Config(format!("fidelity_weights has {} entries, data has {n}", omega.len())));
        }
        WeightedQuadratic::new(omega)
    }

    /// Resolves a method name; `mode` picks `m` for the entropic variants.
    pub fn method(&self, name: &str, seed: u64, blocks: usize) -> Result<(Method, Mode)> {
        let m = self.cfg.mode;
        Ok(match name {
            "entropic" => (Method::Entropic, m),
            "entropic-prob" => (Method::Entropic, Mode::UnitMass),
            "entropic-stochastic" => (Method::Stochastic { blocks, seed }, m),
            "em" => (Method::Em, m),
            "proj-landweber" => (Method::ProjectedLandweber { step: self.pl_step() }, m),
            "general-fidelity" => (Method::GeneralFidelity(Box::new(self.fidelity()?)), m),
            other => return Err(Error::Config(format!("unknown method {other:?}"))),
        })
    }
}
