//! Criterion benchmarks for the permuton kernels live under `benches/`.
