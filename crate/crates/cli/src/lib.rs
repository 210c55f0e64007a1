//! Configuration, file formats and subcommands for reproducible model,
//! synthesis and fitting runs. The numerics live in `tlsbrillouin-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod grid;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error("io: {0}")]
    Io(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("{failed} of {total} bins failed to fit (more than half)")]
    TooManyFailures { failed: usize, total: usize },
    #[error(transparent)]
    Model(#[from] tlsbrillouin_core::Error),
}
