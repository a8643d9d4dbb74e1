//! `ipslab`: command-line front end for the substitution/cut-and-paste
//! simulation laboratory.
//!
//! Subcommands: `check`, `simulate`, `couple`, `dual`, `moments`. Every
//! command reads one JSON configuration document (`--config`), optionally
//! overridden by `--seed` and `--out`. Exit codes: 0 on success, 2 on
//! configuration errors, 3 on runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ipslab_cli::commands::{self, CliError};
use ipslab_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "ipslab",
    version,
    about = "Substitution + cut-and-paste process laboratory"
)]
struct Cli {
    /// Path to the JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: the configured `output`, else `.`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every ergodicity and attractiveness condition
    Check,
    /// Run the single-copy process and emit trajectory samples
    Simulate,
    /// Run the two-copy basic coupling
    Couple,
    /// Run the dominating branching process or the dual-set process
    Dual,
    /// Evaluate the stationary moment system on a trajectory file
    Moments,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Config("--config <FILE> is required".into()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let out_dir = config.output.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    match cli.command {
        Command::Check => commands::cmd_check(&config, &out_dir),
        Command::Simulate => commands::cmd_simulate(&config, &out_dir),
        Command::Couple => commands::cmd_couple(&config, &out_dir),
        Command::Dual => commands::cmd_dual(&config, &out_dir),
        Command::Moments => commands::cmd_moments(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
