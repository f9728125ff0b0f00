use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tariffsearch::{run, with_threads, CliError, Command, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "tariffsearch", version, about = "Consumer-search equilibria under linear prices and two-part tariffs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write x,y tables under `plot/`.
    #[arg(long, global = true)]
    emit_plot_data: bool,
    /// Multiplies the verification tolerances.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Worker threads for sweeps and simulations.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the equilibrium of each regime.
    Solve,
    /// Certify solver output or an external `x,cdf` table.
    Verify {
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Monte Carlo replay of the solved market.
    Simulate {
        /// Also write per-replication estimates.
        #[arg(long)]
        per_replication: bool,
    },
    /// Solve and compare regimes over a parameter grid.
    Sweep,
    /// Welfare of both regimes and the orderings between them.
    Welfare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    let mut opts = RunOptions {
        out: cli.out,
        seed: cli.seed,
        emit_plot_data: cli.emit_plot_data,
        tolerance_scale: cli.tolerance_scale,
        ..RunOptions::default()
    };
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Verify { table } => {
            opts.table = table;
            Command::Verify
        }
        Cmd::Simulate { per_replication } => {
            opts.per_replication = per_replication;
            Command::Simulate
        }
        Cmd::Sweep => Command::Sweep,
        Cmd::Welfare => Command::Welfare,
    };
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let config = RunConfig::load(&path)?;
    let outcome = with_threads(cli.threads, || run(command, &config, &opts))??;
    Ok(outcome.warnings)
}
