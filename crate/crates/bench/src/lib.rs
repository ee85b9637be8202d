//! Criterion benchmarks for the maxplus crate; see `benches/`.
