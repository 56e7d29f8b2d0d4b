//! Monte Carlo engine, estimators, configuration, file output and
//! validation suites.

pub mod commands;
pub mod config;
pub mod estimators;
pub mod export;
pub mod manifest;
pub mod mc;
pub mod suites;

pub use config::{ForwardConfig, ProcessSpec, RunConfig};
pub use estimators::{delta_method, mean_and_se, pairwise_sum, StatEstimate};
pub use export::{export_paths, read_paths, ExportFormat};
pub use manifest::{CheckRecord, RunManifest, Rule};
pub use mc::{collect_paths, run_mc, McConfig, McEstimate};
pub use suites::{validate_suite, SUITES};
