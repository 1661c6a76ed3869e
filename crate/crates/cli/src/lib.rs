//! Configuration-driven experiment runner for `holoris-core`.
//!
//! Every scenario writes one CSV, `<out>/<scenario>.csv`, whose leading
//! `# ` lines echo the resolved configuration.

pub mod config;
pub mod scenarios;

use std::fs;
use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigFile, ExperimentConfig, Overrides};
pub use scenarios::{list_scenarios, run_scenario, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] holoris_core::HolorisError),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Runs the experiment and writes its CSV; returns the path written.
pub fn run(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let bytes = run_scenario(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("{}.csv", cfg.scenario.name()));
    fs::write(&path, bytes)?;
    Ok(path)
}
