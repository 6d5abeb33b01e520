//! Configuration-driven sweeps, figure presets and the command-line front end.

pub mod cli;
pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod validate;

pub use config::{Command, Format, Resolved, SweepConfig};
pub use run::{run, Table, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    /// Bad or inconsistent configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}
