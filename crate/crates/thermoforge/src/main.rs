use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thermoforge::{run, Command, Format, RunConfig, MAX_MICROSTATES_VAR};

/// Thermodynamic transition feasibility and single-shot work for finite systems.
///
/// Inputs are JSON state files: {"beta": 1.0, "levels": [{"energy": 0.0, "degeneracy": 1}, ...],
/// "probabilities": [...]}. Leave out "probabilities" for the Gibbs state.
/// Exit codes: 0 success, 2 negative verdict, 1 input error.
#[derive(Debug, Parser)]
#[command(name = "thermoforge", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// State files; `switch` takes initial then final, `lp-check`/`db-check`
    /// take initial, target and optionally a map file.
    inputs: Vec<PathBuf>,
    /// Smoothing parameter in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Inverse temperature, overriding the files.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = thermoforge_core::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Exact-rational linear programming at any dimension.
    #[arg(long)]
    exact: bool,
    /// Worker threads for the oracle sweep.
    #[arg(long)]
    jobs: Option<usize>,
    /// Independent copies of the state (`work`).
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Largest bath energy (`oracle`).
    #[arg(long, default_value_t = 16)]
    bath_max_energy: i64,
    /// Allowed energy-matching residual (`oracle`).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Cap on tensor-product sizes.
    #[arg(long, env = MAX_MICROSTATES_VAR, default_value_t = thermoforge_core::DEFAULT_MAX_MICROSTATES)]
    max_microstates: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap would exit with 2, which is reserved for negative verdicts
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let config = RunConfig {
        command: cli.command,
        inputs: cli.inputs,
        epsilon: cli.epsilon,
        beta: cli.beta,
        format: cli.format,
        tolerance: cli.tolerance,
        exact: cli.exact,
        jobs: cli.jobs,
        copies: cli.copies,
        bath_max_energy: cli.bath_max_energy,
        delta: cli.delta,
        max_microstates: cli.max_microstates,
    };
    let report = match run(&config).and_then(|r| Ok((r.render(config.format)?, r.exit_code()))) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut out = std::io::stdout().lock();
    if out.write_all(report.0.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(report.1)
}
