//! File formats and command dispatch for the `thermoforge` binary.
//!
//! Every command reads one or more JSON state files (see [`schema`]) and
//! produces a [`Report`]: a JSON document and a CSV table carrying the same
//! data. Exit codes: 0 success, 2 negative verdict, 1 bad input.

use std::fmt;
use std::path::PathBuf;

pub mod output;
mod run;
pub mod schema;

pub use output::{Format, Report};
pub use run::{run, run_on_texts};

/// Variable overriding the cap on tensor-product sizes.
pub const MAX_MICROSTATES_VAR: &str = "THERMOFORGE_MAX_MICROSTATES";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Thermo-majorization curve of one state.
    Curve,
    /// Whether the first state can be turned into the second.
    Feasible,
    /// Distillable work and work of formation.
    Work,
    /// Work for a change of Hamiltonian, initial file to final file.
    Switch,
    /// Gibbs-preserving map search by linear programming.
    LpCheck,
    /// Same, restricted to maps obeying detailed balance.
    DbCheck,
    /// Explicit toy-bath cross-check.
    Oracle,
    /// Build constants and a summary of each input.
    Info,
}

impl Command {
    /// Name as typed on the command line.
    pub fn name(self) -> String {
        use clap::ValueEnum;
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// Smoothing parameter, in `[0, 1)`.
    pub epsilon: f64,
    /// Overrides any `beta` in the input files.
    pub beta: Option<f64>,
    pub format: Format,
    pub tolerance: f64,
    /// Exact-rational LP whatever the dimension.
    pub exact: bool,
    pub jobs: Option<usize>,
    /// `work`: number of independent copies of the state.
    pub copies: usize,
    /// `oracle`: largest bath energy.
    pub bath_max_energy: i64,
    /// `oracle`: allowed energy-matching residual.
    pub delta: f64,
    pub max_microstates: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            inputs: Vec::new(),
            epsilon: 0.0,
            beta: None,
            format: Format::Json,
            tolerance: thermoforge_core::DEFAULT_TOLERANCE,
            exact: false,
            jobs: None,
            copies: 1,
            bath_max_energy: 16,
            delta: 0.0,
            max_microstates: thermoforge_core::DEFAULT_MAX_MICROSTATES,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(CliError::input(format!("--epsilon {} outside [0, 1)", self.epsilon)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::input(format!("--tolerance {} must be positive", self.tolerance)));
        }
        if let Some(beta) = self.beta {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(CliError::input(format!("--beta {beta} must be finite and non-negative")));
            }
        }
        if self.copies == 0 {
            return Err(CliError::input("--copies must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::input("--jobs must be at least 1"));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(CliError::input(format!("--delta {} must be non-negative", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or malformed input.
    Input,
    /// The computation itself failed.
    Compute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Compute, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<thermoforge_core::Error> for CliError {
    fn from(e: thermoforge_core::Error) -> Self {
        use thermoforge_core::Error as E;
        let kind = match e {
            E::DegenerateLp { .. } | E::Construction(_) | E::NoFeasibleWork => ErrorKind::Compute,
            _ => ErrorKind::Input,
        };
        CliError { kind, message: e.to_string() }
    }
}
