//! `nls-lab` — config-driven runs and verifications for the nonlinear
//! Schrödinger laboratory.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nls_lab::config::{load_config, ScenarioConfig};
use nls_lab::run::{cmd_evolve, cmd_export, cmd_picard, cmd_verify, EXIT_FAILURE};

#[derive(Parser)]
#[command(
    name = "nls-lab",
    version,
    about = "Spectral laboratory for the nonlinear Schrödinger equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured scenario with the Strang scheme.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Duhamel/Picard fixed-point solver.
    Picard {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run inequality checks (decay, strichartz, retarded, lipschitz,
    /// pointwise, conservation, admissible, or all).
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export observables of a stored trajectory as CSV.
    Export {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated observable list (mass, energy, h1, h2, sup).
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn with_config(
    path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    action: impl FnOnce(&ScenarioConfig) -> i32,
) -> i32 {
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nls-lab: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    action(&cfg)
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("NLS_LAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => nls_lab::set_thread_cap(n),
            _ => {
                eprintln!("nls-lab: NLS_LAB_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(EXIT_FAILURE as u8);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are successes; anything else is a
            // usage failure mapped onto the documented code 1.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_FAILURE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let code = match cli.command {
        Command::Evolve { config, out, seed } => with_config(&config, out, seed, cmd_evolve),
        Command::Picard { config, out, seed } => with_config(&config, out, seed, cmd_picard),
        Command::Verify {
            config,
            which,
            out,
            seed,
        } => with_config(&config, out, seed, |cfg| cmd_verify(cfg, which.as_deref())),
        Command::Export {
            config,
            which,
            out,
            seed,
        } => with_config(&config, out, seed, |cfg| cmd_export(cfg, which.as_deref())),
    };
    ExitCode::from(code as u8)
}
