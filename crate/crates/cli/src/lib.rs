//! Command-line driver: reads a run configuration, runs one task through
//! `optosqueeze-core` and writes CSV (and optionally SVG) output.

pub mod config;
pub mod run;
pub mod svg;

pub use config::{parse_config, parse_config_for, ConfigError, RunConfig, Task};
pub use run::{run, RunError, RunSummary};
