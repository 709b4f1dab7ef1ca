//! Command-line driver: configuration, orchestration and file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, RunConfig};
pub use error::CliError;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "HLE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hle-lab",
    version,
    about = "Steady states and stability of radial Henon-Lane-Emden systems"
)]
pub struct Cli {
    /// Subcommand; falls back to `command` in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `KEY=VALUE` with a dotted key, e.g. `params.p=9`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(e.to_string()))
}

pub fn run(cli: &Cli) -> Result<Command, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let command = cli
        .command
        .or(cfg.command)
        .ok_or_else(|| CliError::Config("no subcommand given on the command line or in the config".into()))?;
    cfg.command = Some(command);
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    let pool = thread_pool()?;
    let out = cfg.out.clone();
    if command != Command::Plotdata {
        std::fs::create_dir_all(&out)?;
    }
    pool.install(|| match command {
        Command::Classify => commands::run_classify(&cfg, &out),
        Command::Sweep => commands::run_sweep(&cfg, &out),
        Command::Steady | Command::Asymptotics | Command::Evolve => commands::run_pipeline(&cfg, command, &out),
        Command::Plotdata => plot::run_plotdata(&out),
    })?;
    Ok(command)
}
