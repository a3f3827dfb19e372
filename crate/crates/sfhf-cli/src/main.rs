use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sfhf_cli::config::{self, ResolvedRun};
use sfhf_cli::runner::{self, RunReport};
use sfhf_cli::trace;
use sfhf_core::optim::StopReason;

/// Matrix-free saddle-free Newton optimization benchmarks.
#[derive(Parser)]
#[command(name = "sfhf", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configuration and write its iteration trace as CSV.
    Run {
        /// Path to a TOML run configuration.
        config: PathBuf,
        /// Trace CSV destination; overrides the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override; takes precedence over the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several configurations of one problem and tabulate the results.
    Compare {
        /// Paths to TOML run configurations sharing problem and seed.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Comparison CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_RUN_FAILED: u8 = 1;
const EXIT_BAD_CONFIG: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { config, out, seed } => run_cmd(&config, out.as_deref(), seed),
        Cmd::Compare { configs, out } => compare_cmd(&configs, &out),
    }
}

/// Loads and resolves one config file. All errors here are config errors.
fn resolve_file(path: &Path, seed: Option<u64>) -> anyhow::Result<ResolvedRun> {
    let file = config::load(path)?;
    config::resolve(&file, seed)
}

fn run_cmd(path: &Path, out: Option<&Path>, seed: Option<u64>) -> ExitCode {
    let spec = match resolve_file(path, seed) {
        Ok(spec) => spec,
        Err(err) => return bad_config(err),
    };
    let built = match runner::build_problem(&spec) {
        Ok(built) => built,
        Err(err) => return bad_config(err),
    };
    let report = match runner::drive(&spec, &built) {
        Ok(report) => report,
        Err(err) => return run_failed(err),
    };
    // --out wins over the config's output_path; neither means no CSV.
    let dest = out.or(spec.output_path.as_deref());
    if let Some(dest) = dest {
        if let Err(err) = trace::write_trace(dest, &report.outcome.trace) {
            return run_failed(err);
        }
    }
    println!("{}", runner::summary_line(&report));
    finish(&report)
}

fn compare_cmd(paths: &[PathBuf], out: &Path) -> ExitCode {
    let mut specs = Vec::with_capacity(paths.len());
    for path in paths {
        match resolve_file(path, None) {
            Ok(spec) => specs.push(spec),
            Err(err) => return bad_config(err),
        }
    }
    if let Err(err) = runner::check_comparable(&specs) {
        return bad_config(err);
    }
    let rows = match runner::compare(&specs) {
        Ok(rows) => rows,
        Err(err) => return run_failed(err),
    };
    if let Err(err) = trace::write_compare(out, &rows) {
        return run_failed(err);
    }
    for row in &rows {
        println!(
            "method={} final_f={:.6e} final_grad_norm={:.6e} iterations={} operator_applies={}",
            row.method, row.final_f, row.final_grad_norm, row.iterations, row.operator_applies
        );
    }
    ExitCode::SUCCESS
}

fn finish(report: &RunReport) -> ExitCode {
    match report.outcome.stop_reason {
        StopReason::Converged | StopReason::Budget => ExitCode::SUCCESS,
        StopReason::Failed => {
            let detail = report
                .outcome
                .failure
                .as_ref()
                .map(|e| e.to_string())
                .unwrap_or_else(|| "unknown failure".into());
            eprintln!("error: optimizer failed: {detail}");
            ExitCode::from(EXIT_RUN_FAILED)
        }
    }
}

fn bad_config(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(EXIT_BAD_CONFIG)
}

fn run_failed(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(EXIT_RUN_FAILED)
}
