//! Pipeline steps behind the `hafcp` binary: `train`, `fuzzify`, `mine`,
//! `report` and `pipeline`, exchanging artifacts through one output
//! directory.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_fuzzify, cmd_mine, cmd_pipeline, cmd_report, cmd_train};
pub use config::PipelineConfig;
pub use error::{CliError, ExitKind};
