//! Criterion benchmarks for `qresource`; see `benches/`.
