//! Criterion benchmarks for the entropic iteration; see `benches/steps.rs`.
