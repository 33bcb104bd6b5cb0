//! Batch front end: configuration, the synthesis pipeline and its artifacts.

pub mod config;
mod output;
mod pipeline;
mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use config::{RunConfig, SweepAxis, SweepSpec, U0};
pub use pipeline::{run_synthesis, Synthesis};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Error kinds mapped onto the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::ParamDomain(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::Convergence { .. } | Error::Integration(_) | Error::Precision(_) | Error::Truncation { .. } => {
            EXIT_TOLERANCE
        }
        Error::Dimension(_) | Error::Io(_) => EXIT_INTERNAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "degnull", version, about = "Null controls and control-cost bounds for degenerate fourth-order parabolic equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived parameters (l, gamma, nu, kappa, regime, rho_1..rho_4, critical mu).
    Params(Common),
    /// Eigenvalues and boundary traces of the first K_modes modes.
    Modes(Common),
    /// Full pipeline: biorthogonal family, control, final-state certificate, cost bounds.
    Synthesize(Common),
    /// Cost bounds over the [sweep] grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also synthesize a control at every grid point.
        #[arg(long)]
        with_control: bool,
    },
    /// Invariant checks for the configured problem.
    Verify(Common),
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// TOML run configuration.
    pub config: PathBuf,
    /// Output directory (overrides outputs.directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), Error> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(o) = &self.out {
            cfg.outputs.directory = o.clone();
        }
        let base = self.config.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (common, stage_cmd) = match &cli.command {
        Command::Params(c) => (c, "params"),
        Command::Modes(c) => (c, "modes"),
        Command::Synthesize(c) => (c, "synthesize"),
        Command::Sweep { common, .. } => (common, "sweep"),
        Command::Verify(c) => (c, "verify"),
    };
    let (cfg, base) = match common.load() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let result = match &cli.command {
        Command::Params(_) => pipeline::cmd_params(&cfg),
        Command::Modes(_) => pipeline::cmd_modes(&cfg),
        Command::Synthesize(_) => pipeline::cmd_synthesize(&cfg, &base),
        Command::Sweep { with_control, .. } => pipeline::cmd_sweep(&cfg, &base, *with_control),
        Command::Verify(_) => verify::cmd_verify(&cfg, &base),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error in {stage_cmd} at stage {}: {}", f.stage, f.error);
            let code = exit_code(&f.error);
            if let Err(e) = output::write_failure(&cfg.outputs.directory, f.stage, &f.error, code) {
                eprintln!("could not write failure marker: {e}");
            }
            code
        }
    }
}

/// An error with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

pub(crate) trait Stage<T> {
    fn at(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for Result<T, Error> {
    fn at(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}
