//! Drives optimization runs from resolved configurations.

use anyhow::{bail, Context, Result};
use sfhf_core::objectives::registry::{self, BuiltProblem};
use sfhf_core::optim::{run, Method, RunOutcome, StopReason};

use crate::config::ResolvedRun;
use crate::trace::CompareRow;

/// A finished run with its final-point statistics.
#[derive(Debug)]
pub struct RunReport {
    /// Problem name.
    pub problem: String,
    /// Method that was run.
    pub method: Method,
    /// Optimizer outcome including the trace.
    pub outcome: RunOutcome,
    /// Objective value at the final iterate.
    pub final_f: f64,
    /// Gradient norm at the final iterate.
    pub final_grad_norm: f64,
}

/// Lowercase stop-reason name for summaries.
pub fn stop_name(reason: StopReason) -> &'static str {
    match reason {
        StopReason::Converged => "converged",
        StopReason::Budget => "budget",
        StopReason::Failed => "failed",
    }
}

/// Builds the problem named by the config. Errors here are configuration
/// errors (bad dimensions, unknown problem).
pub fn build_problem(spec: &ResolvedRun) -> Result<BuiltProblem> {
    registry::build(&spec.problem, &spec.params)
        .with_context(|| format!("building problem {:?}", spec.problem))
}

/// Runs the optimizer and evaluates the final iterate.
pub fn drive(spec: &ResolvedRun, built: &BuiltProblem) -> Result<RunReport> {
    let outcome = run(
        built.objective.as_ref(),
        &built.theta0,
        spec.method,
        &spec.cfg,
    )?;
    // A failed run can leave the final iterate unevaluable; the summary
    // still goes out, with NaN standing in for the unobtainable values.
    let final_f = built.objective.eval(&outcome.theta).unwrap_or(f64::NAN);
    let final_grad_norm = built
        .objective
        .grad(&outcome.theta)
        .map(|g| g.norm())
        .unwrap_or(f64::NAN);
    Ok(RunReport {
        problem: spec.problem.clone(),
        method: spec.method,
        outcome,
        final_f,
        final_grad_norm,
    })
}

/// The one-line run summary printed to standard output.
pub fn summary_line(report: &RunReport) -> String {
    format!(
        "problem={} method={} final_f={:.6e} final_grad_norm={:.6e} iterations={} stop={} operator_applies={}",
        report.problem,
        report.method.name(),
        report.final_f,
        report.final_grad_norm,
        report.outcome.trace.len(),
        stop_name(report.outcome.stop_reason),
        report.outcome.total_operator_applies
    )
}

/// Checks the compare precondition: all configs target the same problem
/// instance and seed.
pub fn check_comparable(specs: &[ResolvedRun]) -> Result<()> {
    for pair in specs.windows(2) {
        if pair[0].problem != pair[1].problem {
            bail!(
                "compare needs one problem across configs, got {:?} and {:?}",
                pair[0].problem,
                pair[1].problem
            );
        }
        if pair[0].seed != pair[1].seed {
            bail!(
                "compare needs one seed across configs, got {} and {}",
                pair[0].seed,
                pair[1].seed
            );
        }
        if pair[0].params != pair[1].params {
            bail!("compare needs identical problem parameters across configs");
        }
    }
    Ok(())
}

/// Runs each config in order and tabulates the final statistics.
///
/// A run that stops with a failure aborts the comparison; partial tables
/// are never written.
pub fn compare(specs: &[ResolvedRun]) -> Result<Vec<CompareRow>> {
    check_comparable(specs)?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let built = build_problem(spec)?;
        let report = drive(spec, &built)?;
        if report.outcome.stop_reason == StopReason::Failed {
            let detail = report
                .outcome
                .failure
                .as_ref()
                .map(|e| e.to_string())
                .unwrap_or_else(|| "unknown failure".into());
            bail!("method {} failed: {detail}", spec.method.name());
        }
        rows.push(CompareRow {
            method: spec.method.name().into(),
            final_f: report.final_f,
            final_grad_norm: report.final_grad_norm,
            iterations: report.outcome.trace.len(),
            operator_applies: report.outcome.total_operator_applies,
        });
    }
    Ok(rows)
}
