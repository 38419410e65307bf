//! Benchmarks for the flow oracle and sparsifier constructions live in `benches/`.
