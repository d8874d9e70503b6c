//! `simulate <task> --config <file> [--set key=value ...] --out <dir>`

mod config;
mod error;
mod figures;
mod output;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use kerr_lattice::SystemParams;

use crate::config::{resolve, Task, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::{loss_table, write_atomic, Manifest, OutputDir};

/// Thread count for the worker pool and dense linear algebra.
const THREADS_ENV: &str = "KERR_LATTICE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Two-excitation dynamics of qubits in a Kerr cavity array")]
struct Args {
    task: Task,
    /// JSON run configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set params.delta=-0.15`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set figure=<ID>`.
    #[arg(long)]
    figure: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    kerr_lattice::set_thread_count(n).map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(args: Args) -> Result<usize, CliError> {
    let start = Instant::now();
    configure_threads()?;
    let mut overrides = args.overrides;
    if let Some(f) = args.figure {
        overrides.push(format!("figure={}", serde_json::Value::String(f)));
    }
    let cfg = resolve(args.config.as_deref(), &overrides, args.task)?;
    let params = SystemParams::new(cfg.params)?;
    let mut out = OutputDir::create(&args.out)?;
    let report = tasks::run_task(&cfg, params, &mut out)?;

    let manifest = Manifest {
        tool: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        param_hash: params.fingerprint(),
        params: Some(params),
        basis: report.basis,
        max_residual: report.max_residual,
        loss: loss_table(&params, &cfg.kappa),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: out.written(),
        summary: &report.summary,
        config: &cfg,
    };
    write_atomic(&out.path().join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::from)?;
        std::io::Write::write_all(w, b"\n")?;
        Ok(())
    })?;
    Ok(report.failed_checks)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("error: {}", CliError::ValidationFailed { failed });
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
