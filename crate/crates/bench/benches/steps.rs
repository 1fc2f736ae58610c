use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use entroland::experiments::{truth_fourier, truth_kernel, FourierTruth};
use entroland::operators::{make_kernel_operator, power_iteration_norm, FourierSamplingOperator, KernelKind};
use entroland::{ForwardOperator, Mode, SolverConfig, SolverState};

fn kernel_step(c: &mut Criterion) {
    let op = make_kernel_operator(KernelKind::Exponential, 512, 512).unwrap();
    let z = truth_kernel(1, op.domain()).unwrap();
    let y = op.apply(&z).unwrap();
    let cfg = SolverConfig::for_operator(&op, Mode::Unconstrained).unwrap();
    let state = SolverState::new(entroland::Density::constant(op.domain(), 1.0).unwrap(), &op).unwrap();
    c.bench_function("entropic step k1 n=512", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| {
                s.entropic_step(&op, &y, &cfg).unwrap();
                black_box(s)
            },
            criterion::BatchSize::SmallInput,
        )
    });
}

fn fourier_step(c: &mut Criterion) {
    let op = FourierSamplingOperator::uniform(10.0, 1024, 16).unwrap();
    let z = truth_fourier(FourierTruth::Z1, &op).unwrap();
    let y = op.apply(&z).unwrap();
    let cfg = SolverConfig::new(Mode::UnitMass, 0.9 / (2.0 * std::f64::consts::PI).sqrt()).unwrap();
    let u0 = entroland::Density::constant(op.domain(), 1.0 / 20.0).unwrap();
    let state = SolverState::new(u0, &op).unwrap();
    c.bench_function("entropic step fourier n=1024", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| {
                s.entropic_step(&op, &y, &cfg).unwrap();
                black_box(s)
            },
            criterion::BatchSize::SmallInput,
        )
    });
}

fn norm_estimate(c: &mut Criterion) {
    let op = make_kernel_operator(KernelKind::Gaussian, 512, 512).unwrap();
    c.bench_function("power iteration k2 n=512", |b| b.iter(|| black_box(power_iteration_norm(&op))));
}

criterion_group!(benches, kernel_step, fourier_step, norm_estimate);
criterion_main!(benches);
