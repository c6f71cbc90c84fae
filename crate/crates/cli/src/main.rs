use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmetro_cli::{commands, CliError, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "qmetro", version, about = "Qubit channel estimation experiments")]
struct Cli {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of the config's `output` or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps [default: $QMETRO_THREADS, else all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Class tag, singular values and HNKS/RGNKS verdicts.
    Classify,
    /// Channel QFI with and without ancilla.
    Qfi,
    /// Extension bound per n for the configured protocol's controls.
    Bound,
    /// One CSV row per n for the configured protocol.
    Sweep,
    /// Strategy comparison table.
    Figure2,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("QMETRO_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|e| CliError::Config(format!("QMETRO_THREADS={v:?}: {e}")))?),
            Err(_) => None,
        },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let text = pool.install(|| match cli.command {
        Command::Classify => commands::classify_report(&cfg),
        Command::Qfi => commands::qfi_report(&cfg),
        Command::Bound => commands::bound_table(&cfg),
        Command::Sweep => commands::sweep_table(&cfg),
        Command::Figure2 => commands::figure2_table(&cfg),
    })?;
    match cli.out.or(cfg.output) {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(&path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.one_line());
            ExitCode::from(e.exit_code())
        }
    }
}
