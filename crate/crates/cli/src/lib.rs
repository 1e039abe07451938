//! Experiment harness behind the `nepec` command-line tool.
//!
//! Every experiment resolves a JSON [`config::ExperimentConfig`] plus flag
//! overrides into concrete settings, runs against the `nepec` library and
//! returns a [`table::ResultTable`] that serializes to CSV.

pub mod config;
pub mod experiments;
pub mod formats;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("infeasible decomposition (residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("numerical consistency failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 0 success, 1 configuration, 2 infeasible decomposition, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Infeasible { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<nepec::Error> for CliError {
    fn from(e: nepec::Error) -> Self {
        use nepec::Error as E;
        match e {
            E::InfeasibleRepresentation { residual } => CliError::Infeasible { residual },
            E::Numerical(_) | E::TooManyTerms { .. } | E::Unbounded | E::DegenerateSplit => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
