use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use xrl_core::eval::Metric;

use crate::bench::BenchReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::Usage(format!("unknown report format '{s}' (expected json, csv or markdown)"))),
        }
    }
}

fn header_label(metric: &str) -> String {
    match metric.parse::<Metric>() {
        Ok(m) => format!("{}{}", m.name().to_uppercase(), m.arrow()),
        Err(_) => metric.to_uppercase(),
    }
}

pub fn render_json(report: &BenchReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialises") + "\n"
}

/// One row per (explainer, metric, K), one `auc` row per cell and one
/// `skipped` row per failed cell.
pub fn render_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["explainer", "metric", "row", "k", "mode", "value", "n_defined", "note"]).unwrap();
    for cell in &report.cells {
        let (e, m) = (cell.explainer.as_str(), cell.metric.as_str());
        match (&cell.result, &cell.skipped) {
            (Some(r), _) => {
                let mode = r.mode_chosen.as_deref().unwrap_or("");
                for (k, v) in r.ks.iter().zip(&r.per_k) {
                    w.write_record([e, m, "k", &k.to_string(), mode, &format!("{v:?}"), "", ""]).unwrap();
                }
                w.write_record([e, m, "auc", "", mode, &format!("{:?}", r.auc), &r.n_defined.to_string(), ""])
                    .unwrap();
            }
            (None, reason) => {
                w.write_record([e, m, "skipped", "", "", "", "", reason.as_deref().unwrap_or("")]).unwrap();
            }
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// A grid with one row per explainer and one column per metric, followed
/// by the latency table.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut out = String::new();
    let p = &report.provenance;
    let _ = writeln!(out, "# Benchmark: {}\n", p.env);
    let _ = writeln!(
        out,
        "seed {} | {} samples of {} rows | config {}\n",
        p.seed,
        p.n_samples,
        p.dataset_rows,
        &p.config_hash[..p.config_hash.len().min(12)]
    );
    let _ = write!(out, "| Explainer |");
    for m in &report.metrics {
        let _ = write!(out, " {} |", header_label(m));
    }
    let _ = write!(out, "\n|---|");
    for _ in &report.metrics {
        let _ = write!(out, "---:|");
    }
    out.push('\n');
    for e in &report.explainers {
        let _ = write!(out, "| {e} |");
        for m in &report.metrics {
            let text = match report.cell(e, m).and_then(|c| c.result.as_ref()) {
                Some(r) => format!("{:.4}", r.auc),
                None => "skipped".into(),
            };
            let _ = write!(out, " {text} |");
        }
        out.push('\n');
    }
    let skipped: Vec<_> = report.cells.iter().filter_map(|c| c.skipped.as_ref().map(|s| (c, s))).collect();
    if !skipped.is_empty() {
        let _ = writeln!(out, "\nSkipped cells:\n");
        for (c, reason) in skipped {
            let _ = writeln!(out, "- {} / {}: {}", c.explainer, c.metric, reason.replace('\n', " "));
        }
    }
    if !report.latency.is_empty() {
        let _ = writeln!(out, "\n| Explainer | mean s/sample | p95 s/sample |\n|---|---:|---:|");
        for row in &report.latency {
            match &row.latency {
                Some(l) => {
                    let _ = writeln!(out, "| {} | {:.6} | {:.6} |", row.explainer, l.mean_seconds, l.p95_seconds);
                }
                None => {
                    let _ = writeln!(out, "| {} | n/a | n/a |", row.explainer);
                }
            }
        }
    }
    out
}

pub fn render(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(report, format)).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `report.csv` and `report.md` into `dir`.
pub fn write_all(report: &BenchReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for format in ReportFormat::ALL {
        emit_report(report, format, &dir.join(format!("report.{}", format.extension())))?;
    }
    Ok(())
}

pub fn read_report(path: &Path) -> Result<BenchReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::at_line(path, e.line() as u64, e))
}
