//! The five subcommands. Each builds its tables in memory and returns them
//! with any deferred failure, so callers can inspect results without going
//! through the file system.

use std::path::{Path, PathBuf};

use tariffsearch_core::verify::Tolerances;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Table;

pub mod simulate;
pub mod solve;
pub mod sweep;
pub mod verify;
pub mod welfare;

pub use simulate::simulate;
pub use solve::solve;
pub use sweep::{sweep, SweepPoint};
pub use verify::verify;
pub use welfare::welfare;

/// Seed used when neither the command line nor the config gives one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Simulate,
    Sweep,
    Welfare,
}

/// Command-line settings that override or extend the config file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub emit_plot_data: bool,
    pub tolerance_scale: f64,
    /// External `x,cdf` table for `verify`.
    pub table: Option<PathBuf>,
    pub per_replication: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out: None,
            seed: None,
            emit_plot_data: false,
            tolerance_scale: 1.0,
            table: None,
            per_replication: false,
        }
    }
}

/// Settings after merging the command line over the config.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
    pub plot_data: bool,
    pub tolerances: Tolerances,
    pub tolerance_scale: f64,
    pub table: Option<PathBuf>,
    pub per_replication: bool,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a RunConfig, opts: &RunOptions) -> CliResult<Self> {
        let tolerances = Tolerances::scaled(opts.tolerance_scale)?;
        Ok(Context {
            config,
            seed: opts.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
            plot_data: opts.emit_plot_data || config.output.emit_plot_data,
            tolerances,
            tolerance_scale: opts.tolerance_scale,
            table: opts.table.clone(),
            per_replication: opts.per_replication
                || config.simulate.as_ref().is_some_and(|s| s.per_replication),
        })
    }
}

/// What a command produced: files relative to the output directory, and a
/// failure to report after they are written (failed verification).
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Table)>,
    pub warnings: Vec<String>,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn file(&self, name: &str) -> Option<&Table> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<()> {
        for (name, table) in &self.files {
            table.write(&dir.join(name))?;
        }
        Ok(())
    }
}

pub fn execute(cmd: Command, ctx: &Context) -> CliResult<Outcome> {
    match cmd {
        Command::Solve => solve(ctx),
        Command::Verify => verify(ctx),
        Command::Simulate => simulate(ctx),
        Command::Sweep => sweep(ctx),
        Command::Welfare => welfare(ctx),
    }
}

/// Runs a command and writes its files. Returns the deferred failure, if
/// any, as an error after writing.
pub fn run(cmd: Command, config: &RunConfig, opts: &RunOptions) -> CliResult<Outcome> {
    let ctx = Context::new(config, opts)?;
    let mut outcome = execute(cmd, &ctx)?;
    let dir = opts
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    outcome.write_to(&dir)?;
    match outcome.failure.take() {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}
