mod commands;
mod config;
mod error;
mod figures;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use twm_core::adiabatic::Branch;

use commands::Overrides;
use config::ScenarioConfig;
use error::{CliError, CliResult};
use output::{Format, RunOutput};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Parser)]
#[command(
    name = "twm-lab",
    version,
    about = "Three-wave mixing: full dynamics, stationary branches and Bloch geometry"
)]
struct Cli {
    /// Scenario file (TOML, JSON, or a previous run manifest).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "twm-out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Integrator tolerances as REL[,ABS].
    #[arg(long, global = true, value_parser = commands::parse_tol)]
    tol: Option<(f64, Option<f64>)>,

    /// Stationary branch used to seed runs given by constants.
    #[arg(long, global = true, value_enum)]
    seed_branch: Option<BranchArg>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,

    /// File stem for outputs.
    #[arg(long, global = true, default_value = "run")]
    stem: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the coupled-wave equations.
    Simulate,
    /// Follow the stationary branch and its adiabaticity.
    Trajectory,
    /// Integrate the linear two-level model.
    Linear,
    /// Scan chirp rates in parallel.
    Sweep {
        /// Comma-separated rates, overriding the config.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rates: Option<Vec<f64>>,
    },
    /// Tabulate Jacobi functions and the J combinations.
    EllipticTable {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u_min: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        u_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Reproduce one of the built-in figure scenarios (1 to 10).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=10))]
        n: u8,
    },
}

fn load(cli: &Cli, ov: &Overrides) -> CliResult<ScenarioConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    ov.apply(&mut cfg);
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let ov = Overrides {
        tol: cli.tol,
        seed_branch: cli.seed_branch.map(|b| match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }),
    };
    let out: RunOutput = match &cli.command {
        Command::Simulate => commands::simulate(&load(cli, &ov)?, &cli.stem)?.output,
        Command::Trajectory => commands::trajectory(&load(cli, &ov)?, &cli.stem)?.output,
        Command::Linear => commands::linear(&load(cli, &ov)?, &cli.stem)?,
        Command::Sweep { rates } => commands::sweep(&load(cli, &ov)?, &cli.stem, rates.clone())?.1,
        Command::EllipticTable {
            m,
            u_min,
            u_max,
            step,
        } => commands::elliptic_table(*m, *u_min, *u_max, *step, &cli.stem)?,
        Command::Figure { n } => figures::figure(*n, &ov)?,
    };
    out.write(&cli.out, cli.format, cli.svg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("twm-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
