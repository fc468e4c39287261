//! Benchmarks for the `hyperrad` crate live under `benches/`.
