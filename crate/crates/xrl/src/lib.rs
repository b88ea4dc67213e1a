//! Std companion to `xrl-core`: weight files, CSV tables, timing, the
//! benchmark harness, report rendering and the `xrl` command line.

pub mod bench;
pub mod cli;
pub mod error;
pub mod report;
pub mod scoring;
pub mod tables;
pub mod timing;
pub mod weights;

pub use bench::{run_benchmark, BenchConfig, BenchReport};
pub use error::{Error, Result};
pub use report::{emit_report, ReportFormat};
