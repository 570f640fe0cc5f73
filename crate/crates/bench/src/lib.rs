//! Criterion benchmarks for the facies inversion engine; see `benches/`.
