//! `microdisk` experiment runner.

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

/// Directory used when neither `--out` nor `output.dir` is given.
const OUT_DIR_ENV: &str = "MICRODISK_OUT_DIR";

#[derive(Parser)]
#[command(name = "microdisk", version, about = "Microdisk resonator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir` and $MICRODISK_OUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for scan points.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the experiment catalog.
    List,
}

fn run(
    config_path: &PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let config = config::parse(&text)?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let dir = out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let outcome = experiments::run_experiment(&config)?;
    let written = output::write_outcome(&dir, &config, &outcome)?;
    for p in &written {
        println!("wrote {}", p.display());
    }
    for t in &outcome.targets {
        println!("{} {}", if t.pass { "PASS" } else { "FAIL" }, t.name);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for (name, about) in config::CATALOG {
                println!("{name:<16} {about}");
            }
            Ok(())
        }
        Command::Run {
            config,
            out,
            threads,
        } => run(&config, out, threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
