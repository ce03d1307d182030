//! Configuration, stage orchestration and run manifests behind the
//! `thermoscale` command.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{LoadedConfig, RunConfig};
pub use error::{CliError, CliResult};
pub use pipeline::{Pipeline, RunOptions, Stage, StageOutcome, StageStatus};
