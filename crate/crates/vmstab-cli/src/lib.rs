//! Configuration, orchestration and reports behind the `vmstab` binary.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod setup;

pub use config::{LoadedConfig, RunConfig};
pub use pipeline::{run_pipeline, Command, Outcome};
