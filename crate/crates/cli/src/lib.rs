//! Scenario files, output tables and the subcommands of the `qsl` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{ConfigError, ScenarioConfig};
pub use run::{RunError, SweepKind};
