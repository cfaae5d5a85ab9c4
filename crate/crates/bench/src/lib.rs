//! Criterion benchmarks for sampling and best-response verification live in `benches/`.
