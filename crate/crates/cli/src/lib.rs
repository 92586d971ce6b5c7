//! Campaign driver for the sidelink initial-access simulator: configuration,
//! link sampling and the subcommands behind the `sidelink-ia` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

pub use config::CampaignConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sidelink_ia::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("map PDF is degenerate: {0}")]
    DegenerateMap(String),
    #[error("channel changed between strategies for link {tx}->{rx} at t={t}")]
    Pairing { t: u64, tx: String, rx: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::DegenerateMap(_) => 3,
            _ => 1,
        }
    }
}
