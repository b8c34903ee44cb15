//! Audit and trend tables as Markdown, CSV or JSON.
//!
//! Markdown and CSV show NME and delta as percentages rounded at the
//! configured precision. JSON keeps every value unrounded:
//!
//! ```text
//! { "schema": "nme-audit/audit-report/v1",
//!   "entries": [ { "status": "ok", "attribute", "dataset",
//!                  "with":    { "label", "n", "mean", "variance" },
//!                  "without": { ... }, "delta",
//!                  "test": { "method", "statistic", "p_value", "detail", "degenerate_variance" },
//!                  "alpha", "threshold", "significant",
//!                  "excluded_missing_pred", "excluded_unknown_attr" },
//!                { "status": "unavailable" | "failed", "attribute", "dataset", "reason" } ] }
//! ```
//!
//! Means are NME fractions, not percentages.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{AuditEntry, DeltaSign, TrendComparison};

pub const AUDIT_SCHEMA: &str = "nme-audit/audit-report/v1";
pub const TREND_SCHEMA: &str = "nme-audit/trend-report/v1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to render")]
    Empty,
    #[error("invalid report: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum RenderFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderConfig {
    pub format: RenderFormat,
    /// Decimals after the percent point.
    pub precision: usize,
    pub thousands: bool,
}

impl RenderConfig {
    /// Two decimals; thousands separators only for Markdown.
    pub fn new(format: RenderFormat) -> Self {
        Self { format, precision: 2, thousands: format == RenderFormat::Markdown }
    }
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self::new(RenderFormat::Markdown)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: String,
    pub entries: Vec<AuditEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub schema: String,
    pub trends: Vec<TrendComparison>,
}

fn trim_negative_zero(s: String) -> String {
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn format_percent(fraction: f64, precision: usize) -> String {
    trim_negative_zero(format!("{:.*}", precision, fraction * 100.0))
}

pub fn format_count(n: u64, thousands: bool) -> String {
    let digits = n.to_string();
    if !thousands {
        return digits;
    }
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn format_p(p: f64) -> String {
    if p >= 1e-3 {
        format!("{p:.4}")
    } else {
        format!("{p:.2e}")
    }
}

const AUDIT_COLUMNS: [&str; 9] = [
    "attribute",
    "dataset",
    "mean NME (w/)",
    "# samples (w/)",
    "mean NME (w/o)",
    "# samples (w/o)",
    "delta",
    "p-value",
    "significant",
];

const CSV_COLUMNS: [&str; 9] = [
    "attribute",
    "dataset",
    "mean_nme_with_pct",
    "n_with",
    "mean_nme_without_pct",
    "n_without",
    "delta_pct",
    "p_value",
    "significant",
];

/// Table cells of one entry; unavailable and failed rows are all `NA`.
fn audit_cells(entry: &AuditEntry, cfg: &RenderConfig, percent_sign: bool) -> Vec<String> {
    let mut cells = vec![entry.attribute().to_string(), entry.dataset().to_string()];
    let pct = |x: f64| {
        let mut s = format_percent(x, cfg.precision);
        if percent_sign {
            s.push('%');
        }
        s
    };
    match entry.row() {
        Some(row) => cells.extend([
            pct(row.with.summary.mean),
            format_count(row.with.summary.n, cfg.thousands),
            pct(row.without.summary.mean),
            format_count(row.without.summary.n, cfg.thousands),
            pct(row.delta),
            format_p(row.test.p_value),
            if row.significant { "yes" } else { "no" }.to_string(),
        ]),
        None => cells.extend(std::iter::repeat_n("NA".to_string(), 7)),
    }
    cells
}

fn markdown_table(header: &[&str], align: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("| {} |\n|{}|\n", header.join(" | "), align.join("|"));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

/// Renders entries with the columns in audit-table order, followed by the
/// p-value and significance verdict.
pub fn render_audit_table(entries: &[AuditEntry], cfg: &RenderConfig) -> Result<String, ReportError> {
    if entries.is_empty() {
        return Err(ReportError::Empty);
    }
    Ok(match cfg.format {
        RenderFormat::Markdown => markdown_table(
            &AUDIT_COLUMNS,
            &["---", "---", "---:", "---:", "---:", "---:", "---:", "---:", ":---:"],
            entries.iter().map(|e| audit_cells(e, cfg, true)),
        ),
        RenderFormat::Csv => csv_table(&CSV_COLUMNS, entries.iter().map(|e| audit_cells(e, cfg, false))),
        RenderFormat::Json => to_json(&AuditReport { schema: AUDIT_SCHEMA.into(), entries: entries.to_vec() }),
    })
}

pub fn parse_audit_report(json: &str) -> Result<Vec<AuditEntry>, ReportError> {
    let report: AuditReport = serde_json::from_str(json).map_err(|e| ReportError::Invalid(e.to_string()))?;
    if report.schema != AUDIT_SCHEMA {
        return Err(ReportError::Invalid(format!(
            "schema `{}` is not `{AUDIT_SCHEMA}`",
            report.schema
        )));
    }
    Ok(report.entries)
}

fn sign_cell(sign: DeltaSign) -> &'static str {
    match sign {
        DeltaSign::Negative => "negative",
        DeltaSign::Zero => "zero",
        DeltaSign::Positive => "positive",
        DeltaSign::Unavailable => "NA",
    }
}

/// One row per attribute, one column per dataset, then the verdict.
pub fn render_trend_table(trends: &[TrendComparison], cfg: &RenderConfig) -> Result<String, ReportError> {
    let first = trends.first().ok_or(ReportError::Empty)?;
    let mut header = vec!["attribute"];
    header.extend(first.signs.iter().map(|s| s.dataset.as_str()));
    header.push("agreement");
    let rows = trends.iter().map(|t| {
        let mut row = vec![t.attribute.clone()];
        row.extend(t.signs.iter().map(|s| sign_cell(s.sign).to_string()));
        row.push(if t.agreement { "yes" } else { "no" }.to_string());
        row
    });
    Ok(match cfg.format {
        RenderFormat::Markdown => {
            let mut align = vec!["---"; header.len() - 1];
            align.push(":---:");
            markdown_table(&header, &align, rows)
        }
        RenderFormat::Csv => csv_table(&header, rows),
        RenderFormat::Json => to_json(&TrendReport { schema: TREND_SCHEMA.into(), trends: trends.to_vec() }),
    })
}
