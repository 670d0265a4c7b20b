//! Benchmarks for the collision operator, the kernel quadratures and the
//! inequality suite. Run with `cargo bench -p boltzsmooth-bench`.
