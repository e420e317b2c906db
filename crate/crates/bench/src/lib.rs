//! Criterion benchmarks for the solver kernels live under `benches/`.
