//! Performance benchmarks for the core engine live in
//! `benches/core_ops.rs`; run them with `cargo bench -p hopt-bench`.
//! This crate ships no library code.
