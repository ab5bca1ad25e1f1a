use std::fmt;
use std::process::ExitCode;

use ptmlab_core::Error as CoreError;

/// Failure classes, each with its own process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Schema violation, unparsable config or input file.
    Config(String),
    /// A requested size exceeds a simulator guard.
    Dimension(String),
    /// Any other failure while running.
    Simulation(String),
    /// A guarantee check failed under `--assert`.
    Guarantee(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Guarantee(_) => 5,
        })
    }

    /// Core error raised while reading inputs.
    pub fn input(e: CoreError) -> Self {
        match e {
            CoreError::DimensionGuard { .. } => CliError::Dimension(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }

    /// Core error raised while running an experiment.
    pub fn sim(e: CoreError) -> Self {
        match e {
            CoreError::DimensionGuard { .. } => CliError::Dimension(e.to_string()),
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Dimension(m) => write!(f, "dimension guard: {m}"),
            CliError::Simulation(m) => write!(f, "simulation failure: {m}"),
            CliError::Guarantee(m) => write!(f, "guarantee violated: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
