//! Criterion benchmarks for kmsrp-core; see `benches/`.
