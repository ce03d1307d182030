use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thermoscale_cli::error::EXIT_CONFIG;
use thermoscale_cli::{CliResult, LoadedConfig, Pipeline, RunOptions, Stage, StageStatus};

/// Two-scale thermo-mechanical simulation of random composites.
#[derive(Parser, Debug)]
#[command(name = "thermoscale", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Recompute stages and cell tables even when up to date.
    #[arg(long, global = true)]
    force: bool,
    /// Replace the microstructure seed.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Write outputs here instead of the configured directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Sample unit-cell geometries and mesh them.
    Generate,
    /// Solve the cell problems over the temperature grid.
    Cells,
    /// Effective coefficients and bounds.
    Effective,
    /// Transient macroscopic run.
    Macro,
    /// Reconstruct order 0, 1, 2 fields at the snapshots.
    Reconstruct,
    /// Fine-mesh reference run.
    Dns,
    /// Relative errors of the reconstructions against the reference.
    Errors,
    /// Every enabled stage in dependency order.
    Pipeline,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Generate => Stage::Generate,
            Command::Cells => Stage::Cells,
            Command::Effective => Stage::Effective,
            Command::Macro => Stage::Macro,
            Command::Reconstruct => Stage::Reconstruct,
            Command::Dns => Stage::Dns,
            Command::Errors => Stage::Errors,
            Command::Pipeline => return None,
        })
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| thermoscale_cli::CliError::config("--config", "a configuration file is required"))?;
    let loaded = LoadedConfig::load(path)?;
    let options = RunOptions { force: cli.force, seed_override: cli.seed_override, output_dir: cli.output_dir.clone() };
    let mut pipeline = Pipeline::new(&loaded, &options)?;
    let outcomes = match cli.command.stage() {
        Some(stage) => vec![pipeline.run(stage)?],
        None => pipeline.run_all()?,
    };
    for o in outcomes {
        let status = match o.status {
            StageStatus::Ran => format!("ran in {:.2} s", o.seconds),
            StageStatus::Skipped => "up to date".to_string(),
        };
        println!("{:<12} {status}", o.stage.name());
    }
    println!("outputs in {}", pipeline.output_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start {w} workers: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
