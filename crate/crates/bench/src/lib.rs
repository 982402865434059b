//! Criterion benchmarks for the hot paths of `crdiv-core`; see `benches/`.
