//! `ratiosense`: scenario runner writing CSV datasets and a run manifest.

mod config;
mod error;
mod output;
mod scenarios;

use clap::{Parser, Subcommand};
use config::{has_errors, Level};
use error::CliError;
use output::{write_outputs, Manifest};
use scenarios::Scenario;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Fallback for `--threads`.
const THREADS_ENV: &str = "RATIOSENSE_THREADS";

#[derive(Parser)]
#[command(
    name = "ratiosense",
    version,
    about = "Frequency-estimation scenarios under correlated dephasing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the scenario named in the config and write its datasets.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed for Monte Carlo columns (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to RATIOSENSE_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write an SVG scatter plot per dataset.
        #[arg(long)]
        plot: bool,
    },
    /// Check a config and print diagnostics without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print registered scenario names.
    ListScenarios,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Threads(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn print_diagnostics(diags: &[config::Diagnostic]) {
    for d in diags {
        eprintln!("{d}");
    }
}

fn run(
    config_path: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    plot: bool,
) -> Result<(), CliError> {
    let (cfg, text) = config::load(&config_path)?;
    let mut resolved = config::resolve(&cfg)?;
    if let Some(dir) = out {
        resolved.out_dir = dir;
    }
    if let Some(seed) = seed {
        resolved.seed = seed;
    }
    resolved.plot |= plot;
    let diags = config::validate(&resolved);
    print_diagnostics(&diags);
    if has_errors(&diags) {
        return Err(CliError::Invalid(diags));
    }
    if let Some(t) = thread_count(threads)? {
        if t == 0 {
            return Err(CliError::Threads("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let start = Instant::now();
    let tables = resolved.scenario.run(&resolved)?;
    let manifest = Manifest {
        scenario: resolved.scenario.name(),
        config_text: &text,
        seed: resolved.seed,
        threads: rayon::current_num_threads(),
        runtime: start.elapsed(),
    };
    for path in write_outputs(&resolved.out_dir, &tables, &manifest, resolved.plot)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn validate(config_path: PathBuf) -> Result<(), CliError> {
    let (cfg, _) = config::load(&config_path)?;
    let resolved = config::resolve(&cfg)?;
    let diags = config::validate(&resolved);
    print_diagnostics(&diags);
    if has_errors(&diags) {
        return Err(CliError::Invalid(diags));
    }
    let warnings = diags.iter().filter(|d| d.level == Level::Warning).count();
    println!("{}: ok ({warnings} warning(s))", resolved.scenario.name());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            plot,
        } => run(config, out, seed, threads, plot),
        Command::Validate { config } => validate(config),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<26}{}", s.name(), s.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
