use std::path::PathBuf;
use std::process::ExitCode;

use cavity_memory_cli::{
    compare, metrics, pulse, sweep, CliError, CliResult, Outcome, RunConfig, RunOptions,
};
use clap::{Parser, Subcommand};

/// Exit status for invalid configurations and refused runs.
const CONFIG_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cavity-memory",
    version,
    about = "Storage efficiency of weak coherent pulses in a single-atom cavity memory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "K", default_value_t = 0)]
    jobs: usize,

    /// Allow coherent ladder predictions above n = 0.3.
    #[arg(long, global = true)]
    force: bool,

    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// η and ν over the photon-number list of the config.
    Sweep,
    /// Dump the input envelope and the control field.
    Pulse,
    /// Master equation against the two-excitation ladder.
    Compare,
    /// Cooperativity, η_max and the adiabaticity figure.
    Metrics,
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config", "a configuration file is required"))?;
    let cfg = RunConfig::load(path)?;
    let opts = RunOptions {
        jobs: cli.jobs,
        force: cli.force,
        out: cli.out.clone(),
    };
    match cli.command {
        Command::Sweep => sweep::run_sweep(&cfg, &opts),
        Command::Pulse => pulse::dump_pulse(&cfg, &opts),
        Command::Compare => {
            let (outcome, report) = compare::compare_solvers(&cfg, &opts)?;
            report.summary().iter().for_each(|line| println!("{line}"));
            Ok(outcome)
        }
        Command::Metrics => {
            println!(
                "{}",
                serde_json::to_string_pretty(&metrics::metrics(&cfg)?)?
            );
            Ok(Outcome {
                files: Vec::new(),
                success: true,
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for file in &outcome.files {
                log::info!("wrote {}", file.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: some rows failed or a gate did not pass");
                ExitCode::FAILURE
            }
        }
        Err(e @ (CliError::Config { .. } | CliError::Parse { .. } | CliError::Read { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
