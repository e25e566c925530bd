//! Criterion benchmarks for the `hardy-nls` kernels; see `benches/`.
