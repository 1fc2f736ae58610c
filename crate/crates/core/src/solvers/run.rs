use std::fmt;

use super::config::{Mode, SolverConfig};
use super::fidelity::Fidelity;
use super::state::{em_step, projected_landweber_step, SolverState};
use super::stopping::{StopReason, StoppingRule};
use crate::entropy::{kl_values, Extended};
use crate::error::Error;
use crate::grid::Density;
use crate::operators::{partition_blocks, ForwardOperator, Measurement, OperatorBlock};

/// Operator, data and initial iterate of one reconstruction.
pub struct Problem<'a> {
    pub op: &'a dyn ForwardOperator,
    pub data: Measurement,
    pub initial: Density,
}

pub enum Method {
    Entropic,
    Stochastic { blocks: usize, seed: u64 },
    GeneralFidelity(Box<dyn Fidelity>),
    Em,
    ProjectedLandweber { step: f64 },
}

impl Method {
    pub fn name(&self, mode: Mode) -> String {
        match (self, mode) {
            (Method::Entropic, Mode::Unconstrained) => "entropic".into(),
            (Method::Entropic, Mode::UnitMass) => "entropic-prob".into(),
            (Method::Stochastic { .. }, _) => "entropic-stochastic".into(),
            (Method::GeneralFidelity(_), _) => "general-fidelity".into(),
            (Method::Em, _) => "em".into(),
            (Method::ProjectedLandweber { .. }, _) => "proj-landweber".into(),
        }
    }
}

impl fmt::Debug for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Entropic => f.write_str("Entropic"),
            Method::Stochastic { blocks, seed } => write!(f, "Stochastic {{ blocks: {blocks}, seed: {seed} }}"),
            Method::GeneralFidelity(fid) => write!(f, "GeneralFidelity({})", fid.name()),
            Method::Em => f.write_str("Em"),
            Method::ProjectedLandweber { step } => write!(f, "ProjectedLandweber {{ step: {step} }}"),
        }
    }
}

/// Monitored quantities of iterate `u_k`.
///
/// `ln_ck` and `clamp_events` describe the step `u_k → u_{k+1}` and are empty
/// on the final row.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub residual: f64,
    pub kl_to_truth: Option<Extended>,
    pub d_to_truth: Option<Extended>,
    pub l1_error: Option<f64>,
    pub mass: f64,
    pub ln_ck: Option<f64>,
    pub clamp_events: usize,
    /// `D(u_k, u_{k−1})`, in memory only.
    pub d_step: Option<Extended>,
    /// `F(Au_k)` for general-fidelity runs, in memory only.
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_iterate: Density,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Index of the last iterate.
    pub k_final: usize,
}

/// A step aborted; the trace up to the failing iterate is kept.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub records: Vec<IterationRecord>,
    pub last_iterate: Option<Density>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "solver aborted after {} iterates: {}", self.records.len(), self.error)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        RunError { error, records: Vec::new(), last_iterate: None }
    }
}

enum Engine<'a> {
    Log(SolverState, Option<Vec<(OperatorBlock<'a>, Measurement)>>),
    Plain(Density),
}

impl Engine<'_> {
    fn u(&self) -> &Density {
        match self {
            Engine::Log(s, _) => s.u(),
            Engine::Plain(u) => u,
        }
    }
}

struct Truth<'t> {
    z: &'t Density,
    az: Measurement,
}

/// Iterates `method` from `problem.initial` until `stop` fires or
/// `cfg.max_iter` iterates exist.
pub fn run(
    problem: &Problem<'_>,
    method: &Method,
    stop: &StoppingRule,
    cfg: &SolverConfig,
    truth: Option<&Density>,
) -> std::result::Result<RunOutcome, RunError> {
    cfg.validate()?;
    stop.validate()?;
    let op = problem.op;
    let y = &problem.data;
    op.zero_data().check_same_space(y)?;
    let c = cfg.c();
    let truth = match truth {
        Some(z) => Some(Truth { z, az: op.apply(z)? }),
        None => None,
    };
    let mut engine = match method {
        Method::Entropic | Method::GeneralFidelity(_) => {
            Engine::Log(SolverState::new(problem.initial.clone(), op)?, None)
        }
        Method::Stochastic { blocks, seed } => Engine::Log(
            SolverState::new(problem.initial.clone(), op)?.with_seed(*seed),
            Some(partition_blocks(op, y, *blocks)?),
        ),
        Method::Em | Method::ProjectedLandweber { .. } => Engine::Plain(problem.initial.clone()),
    };
    let target = match *stop {
        StoppingRule::APriori { constant, delta } => Some(StoppingRule::apriori_index(constant, delta)),
        StoppingRule::MaxIter(k) => Some(k - 1),
        _ => None,
    };

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut prev: Option<(Density, Measurement)> = None;
    loop {
        let u = engine.u();
        let k = records.len();
        let au = op.apply(u).map_err(|e| abort(e, &records, u))?;
        let residual = y.sub(&au).map_err(|e| abort(e, &records, u))?.norm();
        let fidelity = match method {
            Method::GeneralFidelity(fid) => Some(fid.value(&au, y).map_err(|e| abort(e, &records, u))?),
            _ => None,
        };
        let (kl_to_truth, d_to_truth, l1_error) = match &truth {
            Some(t) => {
                let kl = kl_values(u.grid().weights(), t.z.values(), u.values());
                let gap = t.az.sub(&au).map_err(|e| abort(e, &records, u))?.norm_sq();
                let d = match kl {
                    Extended::Finite(v) => Extended::Finite(c * v - 0.5 * gap),
                    Extended::Infinite => Extended::Infinite,
                };
                (Some(kl), Some(d), Some(u.l1_distance(t.z).map_err(|e| abort(e, &records, u))?))
            }
            None => (None, None, None),
        };
        let d_step = match &prev {
            Some((pu, pau)) => {
                let kl = kl_values(u.grid().weights(), u.values(), pu.values());
                Some(match kl {
                    Extended::Finite(v) => {
                        let gap = au.sub(pau).map_err(|e| abort(e, &records, u))?.norm_sq();
                        Extended::Finite(c * v - 0.5 * gap)
                    }
                    Extended::Infinite => Extended::Infinite,
                })
            }
            None => None,
        };
        records.push(IterationRecord {
            k,
            residual,
            kl_to_truth,
            d_to_truth,
            l1_error,
            mass: u.mass(),
            ln_ck: None,
            clamp_events: 0,
            d_step,
            fidelity,
        });

        let reason = match *stop {
            StoppingRule::Discrepancy { tau, delta } if residual < tau.sqrt() * delta => {
                Some(StopReason::Discrepancy)
            }
            StoppingRule::ModifiedDiscrepancy { delta } => {
                let f = match fidelity {
                    Some(f) => f,
                    None => 0.5 * residual * residual,
                };
                (f < delta).then_some(StopReason::ModifiedDiscrepancy)
            }
            StoppingRule::APriori { .. } if Some(k) == target => Some(StopReason::APriori),
            StoppingRule::MaxIter(_) if Some(k) == target => Some(StopReason::MaxIter),
            _ => None,
        };
        let reason = reason.or_else(|| (k + 1 >= cfg.max_iter).then_some(StopReason::MaxIter));
        if let Some(stop_reason) = reason {
            let final_iterate = match engine {
                Engine::Log(s, _) => s.into_density(),
                Engine::Plain(u) => u,
            };
            return Ok(RunOutcome { final_iterate, records, stop_reason, k_final: k });
        }

        let snapshot = (u.clone(), au.clone());
        let stepped = match (&mut engine, method) {
            (Engine::Log(state, _), Method::Entropic) => {
                state.entropic_step_with(op, y, &au, cfg).map(|r| (Some(r.ln_c), r.clamp_events))
            }
            (Engine::Log(state, Some(blocks)), Method::Stochastic { .. }) => {
                state.stochastic_entropic_step(blocks, cfg).map(|r| (Some(r.ln_c), r.clamp_events))
            }
            (Engine::Log(state, _), Method::GeneralFidelity(fid)) => state
                .general_fidelity_step(op, y, fid.as_ref(), cfg)
                .map(|r| (Some(r.ln_c), r.clamp_events)),
            (Engine::Plain(u), Method::Em) => em_step(u, y, op).map(|next| {
                *u = next;
                (None, 0)
            }),
            (Engine::Plain(u), Method::ProjectedLandweber { step }) => {
                projected_landweber_step(u, y, op, *step).map(|next| {
                    *u = next;
                    (None, 0)
                })
            }
            _ => unreachable!("engine matches method"),
        };
        match stepped {
            Ok((ln_c, clamps)) => {
                let last = records.last_mut().expect("row pushed above");
                last.ln_ck = ln_c;
                last.clamp_events = clamps;
            }
            Err(error) => {
                return Err(RunError { error, records, last_iterate: Some(snapshot.0) });
            }
        }
        prev = Some(snapshot);
    }
}

fn abort(error: Error, records: &[IterationRecord], u: &Density) -> RunError {
    RunError { error, records: records.to_vec(), last_iterate: Some(u.clone()) }
}
