//! Criterion benchmarks for the graph engine live in `benches/`.
