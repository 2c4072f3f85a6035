//! Benchmark harness: generates random geometric graph Laplacians, runs the
//! configured solver variants over seeds, validates against the dense oracle,
//! and emits a JSON report plus plot-ready CSV panels.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_method, BenchmarkConfig, MethodSpec};
pub use report::{emit_plot_data, Aggregate, BenchmarkReport, RunRecord};
pub use runner::run_benchmark;
