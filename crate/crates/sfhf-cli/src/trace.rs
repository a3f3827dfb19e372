//! CSV serialization for traces and comparison tables.
//!
//! Floats are written with 17 significant digits so parsing a trace back
//! reproduces the exact f64 values. Field order is fixed; the wall-clock
//! column is informative only and excluded from determinism guarantees.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sfhf_core::optim::TraceRecord;

/// Fixed trace header.
pub const TRACE_HEADER: &str = "iter,f,grad_norm,step_norm,inner_cg_iters,sqrt_op_applies,wall_seconds";

/// Fixed comparison-table header.
pub const COMPARE_HEADER: &str = "method,final_f,final_grad_norm,iterations,operator_applies";

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    /// Method name.
    pub method: String,
    /// Objective value at the final iterate.
    pub final_f: f64,
    /// Gradient norm at the final iterate.
    pub final_grad_norm: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Total operator applications.
    pub operator_applies: u64,
}

/// Renders a trace as CSV text.
pub fn format_trace(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{:.16e}\n",
            r.iter,
            r.f_value,
            r.grad_norm,
            r.step_norm,
            r.inner_cg_iters,
            r.sqrt_operator_applies,
            r.wall_seconds
        ));
    }
    out
}

/// Writes a trace CSV in one shot (no partial files on failure).
pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    fs::write(path, format_trace(records))
        .with_context(|| format!("writing trace {}", path.display()))
}

/// Parses CSV text produced by [`format_trace`].
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => bail!("bad trace header: {other:?}"),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            bail!("line {}: expected 7 fields, got {}", lineno + 2, fields.len());
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .with_context(|| format!("line {}: field {what} = {s:?}", lineno + 2))
        };
        records.push(TraceRecord {
            iter: fields[0]
                .parse()
                .with_context(|| format!("line {}: field iter", lineno + 2))?,
            f_value: parse_f(fields[1], "f")?,
            grad_norm: parse_f(fields[2], "grad_norm")?,
            step_norm: parse_f(fields[3], "step_norm")?,
            inner_cg_iters: fields[4]
                .parse()
                .with_context(|| format!("line {}: field inner_cg_iters", lineno + 2))?,
            sqrt_operator_applies: fields[5]
                .parse()
                .with_context(|| format!("line {}: field sqrt_op_applies", lineno + 2))?,
            wall_seconds: parse_f(fields[6], "wall_seconds")?,
        });
    }
    Ok(records)
}

/// Renders the comparison table as CSV text.
pub fn format_compare(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{},{}\n",
            r.method, r.final_f, r.final_grad_norm, r.iterations, r.operator_applies
        ));
    }
    out
}

/// Writes the comparison table in one shot.
pub fn write_compare(path: &Path, rows: &[CompareRow]) -> Result<()> {
    fs::write(path, format_compare(rows))
        .with_context(|| format!("writing comparison {}", path.display()))
}
