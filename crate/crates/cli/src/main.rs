//! `normflow run <config.json>`: runs one experiment and writes its reports.
//!
//! Exit codes: 0 success, 1 input or IO error, 2 a bound or invariant check
//! failed (details in `witness.json`).

mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Mode};
use run::Witness;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{} check(s) failed", .0.len())]
    Violation(Vec<Witness>),
}

impl From<normflow_core::Error> for CliError {
    fn from(e: normflow_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "normflow", version, about = "Continuous averaging normalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `outputs.dir`, else `normflow-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the truncation degree.
        #[arg(long)]
        k: Option<usize>,
        /// Override the mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, out, k, mode } = Cli::parse().command;
    match execute(&config, out, k, mode) {
        Ok(dir) => {
            eprintln!("reports written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(CliError::Violation(w)) => {
            eprintln!("{} check(s) failed; see witness.json", w.len());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("normflow: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NORMFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Input(format!("NORMFLOW_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size thread pool: {e}")))
}

fn output_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    if let Some(d) = cli {
        return d;
    }
    match &cfg.outputs.dir {
        Some(d) if d.is_relative() => config_path.parent().unwrap_or(Path::new(".")).join(d),
        Some(d) => d.clone(),
        None => PathBuf::from("normflow-out"),
    }
}

fn execute(path: &Path, out: Option<PathBuf>, k: Option<usize>, mode: Option<Mode>) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(k) = k {
        cfg.truncation = k;
    }
    if let Some(m) = mode {
        cfg.mode = m;
    }
    let dir = output_dir(out, &cfg, path);
    let exp = cfg.resolve()?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;

    let outcome = match run::run(&exp, exp.config.mode) {
        Err(CliError::Violation(w)) => {
            report::write_json(&dir, "witness", &w)?;
            return Err(CliError::Violation(w));
        }
        other => other?,
    };
    if exp.config.outputs.csv {
        for t in &outcome.tables {
            t.write(&dir)?;
        }
    }
    if exp.config.outputs.json {
        report::write_json(&dir, "report", &outcome.report)?;
    }
    if !outcome.witnesses.is_empty() {
        report::write_json(&dir, "witness", &outcome.witnesses)?;
        return Err(CliError::Violation(outcome.witnesses));
    }
    Ok(dir)
}
