//! Criterion benchmarks for the `nepec` crate; see `benches/`.
