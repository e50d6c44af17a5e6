//! Criterion benchmarks for antenna selection live under `benches/`.
