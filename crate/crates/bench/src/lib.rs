//! Criterion benchmarks for the optimizer; see `benches/solver.rs`.
