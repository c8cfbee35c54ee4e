//! Library side of the `pollbench` command: experiment configs, CSV
//! reports and the subcommand implementations.

pub mod commands;
pub mod config;

pub use config::{BenchmarkChoice, ExperimentConfig, InstanceSource, SweepAxis};
