//! Experiment driver for `anneal-lab`: JSON configs in, CSV datasets and a run
//! manifest out.

pub mod checkpoint;
pub mod config;
pub mod estimate;
pub mod run;

use std::path::PathBuf;

pub use config::{Diagnostic, ExperimentConfig, ExperimentKind, Grid, RampConfig, SectorChoice};
pub use estimate::{estimate, CostReport};
pub use run::{run, RunManifest, TaskStatus};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<Diagnostic>),

    #[error("capacity exceeded:\n{}", .0.join("\n"))]
    Capacity(Vec<String>),

    #[error(transparent)]
    Lab(#[from] anneal_lab::Error),

    #[error("i/o failure on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

fn list(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// Process exit code: 2 for configuration errors, 3 for capacity errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Capacity(_) | Self::Lab(anneal_lab::Error::Capacity { .. }) => 3,
            _ => 1,
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    ExperimentConfig::from_json(&text).map_err(CliError::Config)
}
