//! Deterministic rendering of run results as markdown, CSV or JSON.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::metrics::{AgreementStratum, MetricPoint, RunSeries};
use crate::pareto::{pareto_mask, ScenarioPoint};
use crate::routing::SweepRow;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn fixed(x: f64, decimals: usize) -> String {
    format!("{x:.decimals$}")
}

fn opt(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| fixed(v, decimals))
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// One row per agreement band.
    pub fn strata(strata: &[AgreementStratum]) -> Self {
        let mut t = Self::new("Agreement strata", &["Stratum", "Agreement", "N", "EM (voted)", "Oracle"]);
        for s in strata {
            let close = if s.upper_inclusive { "]" } else { ")" };
            t.push(vec![
                s.label.as_str().to_string(),
                format!("[{}, {}{close}", fixed(s.lower, 1), fixed(s.upper, 1)),
                s.n.to_string(),
                opt(s.em_voted, 3),
                opt(s.oracle, 3),
            ]);
        }
        t
    }

    pub fn threshold_sweep(rows: &[SweepRow]) -> Self {
        let mut t = Self::new("Threshold sweep", &["theta_high", "EM", "Rerouted", "Rerouted %"]);
        for r in rows {
            t.push(vec![fixed(r.theta_high, 2), fixed(r.em, 3), r.rerouted.to_string(), fixed(r.rerouted_pct, 1)]);
        }
        t
    }

    /// Per-run values with mean and both standard deviations.
    pub fn variance(series: &[RunSeries]) -> Self {
        let runs = series.first().map_or(0, |s| s.per_run_values.len());
        let mut columns: Vec<String> = vec!["Metric".into()];
        columns.extend((1..=runs).map(|r| format!("Run {r}")));
        columns.extend(["Mean".into(), "Sigma".into(), "Sample sigma".into()]);
        let mut t = Self { title: "Inter-run variance".into(), columns, rows: Vec::new() };
        for s in series {
            let mut row = vec![s.metric.clone()];
            row.extend(s.per_run_values.iter().map(|v| fixed(*v, 3)));
            row.extend([fixed(s.mean, 3), fixed(s.sigma, 4), opt(s.sample_sigma, 4)]);
            t.push(row);
        }
        t
    }

    pub fn pareto(points: &[ScenarioPoint]) -> Self {
        let mut t = Self::new("Cost vs. EM", &["Scenario", "Rel. cost", "EM", "VRAM (GB)", "Models", "Frontier"]);
        for (p, keep) in points.iter().zip(pareto_mask(points)) {
            t.push(vec![
                p.name.clone(),
                format!("x{}", p.relative_cost),
                fixed(p.em, 3),
                opt(p.vram_gb, 1),
                p.model_count.map_or_else(|| "-".to_string(), |m| m.to_string()),
                if keep { "yes" } else { "no" }.to_string(),
            ]);
        }
        t
    }
}

/// Everything a task run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub task: String,
    pub config_hash: String,
    pub seed: u64,
    pub n: usize,
    pub metrics: Vec<MetricPoint>,
    #[serde(default)]
    pub tables: Vec<Table>,
}

impl ScoreReport {
    pub fn metric(&self, name: &str) -> Option<&MetricPoint> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// The metric list as a table.
    pub fn metrics_table(&self) -> Table {
        let mut t = Table::new("Metrics", &["Metric", "Value", "95% CI", "N"]);
        for m in &self.metrics {
            let d = usize::from(m.decimals);
            let ci = match (m.ci_low, m.ci_high) {
                (Some(lo), Some(hi)) => format!("[{}, {}]", fixed(lo, d), fixed(hi, d)),
                _ => "-".to_string(),
            };
            t.push(vec![m.name.clone(), fixed(m.value, d), ci, m.n.to_string()]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

fn markdown_table(out: &mut String, t: &Table) {
    let _ = writeln!(out, "| {} |", t.columns.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(t.columns.len()));
    for row in &t.rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    let row: Vec<String> = fields.iter().map(|f| csv_field(f.as_ref())).collect();
    let _ = writeln!(out, "{}", row.join(","));
}

/// Render a report. Output depends only on the arguments.
pub fn render_report(report: &ScoreReport, format: ReportFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(out, "# {}\n", report.task);
            let _ = writeln!(out, "- config hash: `{}`", report.config_hash);
            let _ = writeln!(out, "- seed: {}", report.seed);
            let _ = writeln!(out, "- N: {}\n", report.n);
            markdown_table(&mut out, &report.metrics_table());
            for t in &report.tables {
                let _ = writeln!(out, "\n## {}\n", t.title);
                markdown_table(&mut out, t);
            }
        }
        ReportFormat::Csv => {
            csv_row(&mut out, &["task", "config_hash", "seed", "n"]);
            csv_row(&mut out, &[report.task.clone(), report.config_hash.clone(), report.seed.to_string(), report.n.to_string()]);
            for t in core::iter::once(&report.metrics_table()).chain(&report.tables) {
                out.push('\n');
                csv_row(&mut out, &["table", t.title.as_str()]);
                csv_row(&mut out, &t.columns);
                for row in &t.rows {
                    csv_row(&mut out, row);
                }
            }
        }
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(report)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            out.push('\n');
        }
    }
    Ok(out)
}
