//! Command-line front end: config parsing, figure presets, run orchestration,
//! manifests and minimal SVG output.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod presets;
pub mod svg;

use std::fmt;

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(dtpt::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn config(e: dtpt::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dtpt::Error> for CliError {
    fn from(e: dtpt::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
