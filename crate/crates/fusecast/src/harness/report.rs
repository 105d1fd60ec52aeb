//! Report serialization: an aligned text table or a CSV with a
//! `model,MAPE,MSE,ARV` header. Diagnostics (validation SSE, footnotes,
//! combiner failures) ride along as `#` comment lines in CSV and as trailing
//! sections in the table. Timings are deliberately excluded so identical
//! runs produce identical bytes.

use super::config::ReportFormat;
use super::ExperimentReport;
use crate::error::Result;
use std::path::Path;

/// Writes bytes to `path` atomically: a sibling temp file is written first
/// and then renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn render_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("model,MAPE,MSE,ARV\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.label, row.metrics.mape, row.metrics.mse, row.metrics.arv
        ));
    }
    out.push_str(&format!("# dataset,{}\n", report.dataset));
    out.push_str(&format!("# seed,{}\n", report.seed));
    out.push_str(&format!("# mode,{}\n", report.mode));
    for (name, sse) in &report.validation_sse {
        out.push_str(&format!("# validation_sse,{name},{sse}\n"));
    }
    for note in &report.footnotes {
        out.push_str(&format!("# note,{note}\n"));
    }
    for (name, error) in &report.failures {
        out.push_str(&format!("# failed,{name},{error}\n"));
    }
    out
}

fn render_table(report: &ExperimentReport) -> String {
    let label_width = report
        .rows
        .iter()
        .map(|r| r.label.len())
        .chain(report.validation_sse.iter().map(|(n, _)| n.len()))
        .chain(["model".len()])
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "dataset: {}  (seed {}, {} forecasts)\n\n",
        report.dataset, report.seed, report.mode
    );
    out.push_str(&format!(
        "{:<label_width$}  {:>14}  {:>14}  {:>14}\n",
        "model", "MAPE", "MSE", "ARV"
    ));
    for row in &report.rows {
        out.push_str(&format!(
            "{:<label_width$}  {:>14.6}  {:>14.6}  {:>14.6}\n",
            row.label, row.metrics.mape, row.metrics.mse, row.metrics.arv
        ));
    }
    if !report.validation_sse.is_empty() {
        out.push_str("\nvalidation SSE\n");
        for (name, sse) in &report.validation_sse {
            out.push_str(&format!("{name:<label_width$}  {sse:>14.6}\n"));
        }
    }
    for note in &report.footnotes {
        out.push_str(&format!("\nnote: {note}\n"));
    }
    for (name, error) in &report.failures {
        out.push_str(&format!("\nfailed: {name}: {error}\n"));
    }
    out
}

/// Renders the report in the requested format. CSV metric values use the
/// shortest representation that parses back to the exact same float.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Table => render_table(report),
    }
}

/// Renders and writes the report atomically.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    write_atomic(path, render_report(report, format).as_bytes())
}
