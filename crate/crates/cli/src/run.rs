use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Args;
use entroland::experiments::{Experiment, ProblemSpec, StopKind};
use entroland::solvers::{write_trace_csv, Method, RunOutcome, StopReason, TraceMeta};
use entroland::{run, Mode, StoppingRule};

use crate::{StopArg, EXIT_ABORT, EXIT_CONFIG};

const METHODS: [&str; 6] = ["entropic", "entropic-prob", "entropic-stochastic", "em", "proj-landweber", "general-fidelity"];

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Method name; repeat to run several.
    #[arg(long = "method", required = true, value_parser = clap::builder::PossibleValuesParser::new(METHODS))]
    methods: Vec<String>,
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Step size λ (c = 1/λ).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau_disc: Option<f64>,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Seed for noise and block selection.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of row blocks for entropic-stochastic.
    #[arg(long)]
    blocks: Option<usize>,
    /// Noise level for the stopping rule instead of the realized one.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

struct Job {
    method_name: String,
    method: Method,
    mode: Mode,
}

struct Finished {
    method_name: String,
    csv: PathBuf,
    outcome: std::result::Result<RunOutcome, entroland::solvers::RunError>,
}

fn prepare(args: &RunArgs) -> anyhow::Result<(Experiment, StoppingRule, Vec<Job>, u64, usize)> {
    let mut spec = ProblemSpec::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(s) = args.sigma {
        spec.noise_sigma = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    let d = &mut spec.defaults;
    if let Some(l) = args.lambda {
        d.lambda_step = Some(l);
    }
    if let Some(t) = args.tau_disc {
        d.tau_disc = t;
    }
    if let Some(k) = args.max_iter {
        d.max_iter = k;
    }
    if let Some(m) = args.blocks {
        d.blocks = m;
    }
    let blocks = d.blocks;
    let seed = spec.seed;
    let stop_kind = match args.stop {
        Some(StopArg::Discrepancy) => StopKind::Discrepancy,
        Some(StopArg::Apriori) => StopKind::Apriori,
        Some(StopArg::Maxiter) => StopKind::Maxiter,
        None => spec.defaults.stop,
    };
    let base = args.config.parent().map(Path::to_path_buf);
    let ex = spec.build(base.as_deref())?;
    let stop = ex.stopping_rule(stop_kind, args.delta)?;
    let mut jobs = Vec::new();
    for name in &args.methods {
        if jobs.iter().any(|j: &Job| &j.method_name == name) {
            bail!("method {name} given twice");
        }
        let (method, mode) = ex.method(name, seed, blocks)?;
        jobs.push(Job { method_name: name.clone(), method, mode });
    }
    Ok((ex, stop, jobs, seed, blocks))
}

fn thread_cap() -> usize {
    std::env::var("ENTROLAND_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn meta(ex: &Experiment, job: &Job, stop: &StoppingRule, seed: u64, blocks: usize) -> TraceMeta {
    let mut cfg = ex.cfg;
    cfg.mode = job.mode;
    let delta = match *stop {
        StoppingRule::Discrepancy { delta, .. } | StoppingRule::APriori { delta, .. } => delta,
        StoppingRule::ModifiedDiscrepancy { delta } => delta,
        StoppingRule::MaxIter(_) => ex.data.delta,
    };
    let stochastic = matches!(job.method, Method::Stochastic { .. });
    TraceMeta {
        problem_id: ex.spec.id.clone(),
        method: job.method_name.clone(),
        m: job.mode.index(),
        lambda: cfg.lambda,
        c: cfg.c(),
        tau: cfg.tau,
        delta,
        seed: Some(seed),
        blocks: stochastic.then_some(blocks),
        grid: ex.op.domain().spec(),
        data_len: ex.op.data_len(),
        operator_id: ex.op.id(),
        stop_rule: stop.to_string(),
        stop_reason: None,
        k_star: None,
        rows: 0,
        initial: format!("constant {}", ex.initial.values()[0]),
        noise_sigma: ex.spec.noise_sigma,
        noise_model: if ex.data.exact.is_complex() {
            "iid N(0, sigma^2) on real and imaginary parts".into()
        } else {
            "iid N(0, sigma^2) per sample".into()
        },
        clamp_events: 0,
        error: None,
    }
}

fn write_outputs(csv: &Path, records: &[entroland::IterationRecord], meta: &TraceMeta) -> anyhow::Result<()> {
    write_trace_csv(records, BufWriter::new(File::create(csv)?))?;
    meta.write_json(BufWriter::new(File::create(crate::sidecar_path(csv))?))?;
    Ok(())
}

pub fn cmd_run(args: RunArgs) -> ExitCode {
    let (ex, stop, jobs, seed, blocks) = match prepare(&args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    let problem = ex.problem();
    let cap = thread_cap();
    let mut finished: Vec<Finished> = Vec::new();
    for chunk in jobs.chunks(cap) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|job| {
                    let (problem, stop, ex, out) = (&problem, &stop, &ex, &args.out);
                    scope.spawn(move || {
                        let mut cfg = ex.cfg;
                        cfg.mode = job.mode;
                        let outcome = run(problem, &job.method, stop, &cfg, Some(&ex.truth));
                        Finished {
                            method_name: job.method_name.clone(),
                            csv: out.join(format!("{}_{}.csv", ex.spec.id, job.method_name)),
                            outcome,
                        }
                    })
                })
                .collect();
            for h in handles {
                finished.push(h.join().expect("solver thread panicked"));
            }
        });
    }

    let mut code = ExitCode::SUCCESS;
    for (job, f) in jobs.iter().zip(&finished) {
        let mut m = meta(&ex, job, &stop, seed, blocks);
        let written = match &f.outcome {
            Ok(o) => {
                m.stop_reason = Some(o.stop_reason);
                m.k_star = (o.stop_reason != StopReason::MaxIter).then_some(o.k_final);
                m.rows = o.records.len();
                m.clamp_events = o.records.iter().map(|r| r.clamp_events).sum();
                let last = o.records.last().expect("at least one row");
                let k_star = m.k_star.map_or("-".to_string(), |k| k.to_string());
                println!(
                    "{} {}: k* = {}, final residual = {:e}, final L1 error = {:e}, rows = {}",
                    ex.spec.id,
                    f.method_name,
                    k_star,
                    last.residual,
                    last.l1_error.unwrap_or(f64::NAN),
                    m.rows
                );
                write_outputs(&f.csv, &o.records, &m)
            }
            Err(e) => {
                m.rows = e.records.len();
                m.clamp_events = e.records.iter().map(|r| r.clamp_events).sum();
                m.error = Some(e.error.to_string());
                eprintln!("{} {}: {e}", ex.spec.id, f.method_name);
                code = ExitCode::from(EXIT_ABORT);
                write_outputs(&f.csv, &e.records, &m)
            }
        };
        if let Err(e) = written {
            eprintln!("error: writing {}: {e:#}", f.csv.display());
            code = ExitCode::from(EXIT_CONFIG);
        }
    }
    code
}
