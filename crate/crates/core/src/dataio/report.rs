//! Score reports in the familiar "J&F J F" percentage layout.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{score_dataset, DatasetScore, ExpressionScore, MetricsError};

use super::{io_err, DataError};

/// Formats a score in `[0, 1]` as a percentage with one decimal, rounding
/// halves away from zero. Values within 1e-6 of a half are treated as halves
/// so that binary representation error (0.5225 is stored as 0.52249999...)
/// does not flip the result.
pub fn format_percent(x: f64) -> String {
    let t = x * 1000.0;
    let frac = t - t.trunc();
    let rounded = if (frac.abs() - 0.5).abs() < 1e-6 {
        t.trunc() + t.signum()
    } else {
        t.round()
    };
    let v = rounded / 10.0;
    // avoid printing "-0.0"
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.1}")
}

/// `"J&F J F"` as printed percentages.
pub fn format_row(score: &DatasetScore) -> String {
    format!(
        "{} {} {}",
        format_percent(score.jf),
        format_percent(score.j),
        format_percent(score.f)
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Structured,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Structured => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Structured => "structured",
            ReportFormat::Csv => "csv",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(ReportFormat::Structured),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format '{other}' (expected structured or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub dataset: String,
    pub expressions: usize,
    #[serde(rename = "J&F")]
    pub jf: String,
    #[serde(rename = "J")]
    pub j: String,
    #[serde(rename = "F")]
    pub f: String,
    pub summary: DatasetScore,
    pub per_expression: Vec<ExpressionScore>,
}

impl Report {
    /// Aggregates per-expression scores; fails on an empty list.
    pub fn new(dataset: impl Into<String>, mut scores: Vec<ExpressionScore>) -> Result<Self, MetricsError> {
        let summary = score_dataset(&scores)?;
        scores.sort_by(|a, b| {
            (a.video_id.as_str(), a.expression_id.as_str()).cmp(&(b.video_id.as_str(), b.expression_id.as_str()))
        });
        Ok(Report {
            dataset: dataset.into(),
            expressions: summary.expression_count,
            jf: format_percent(summary.jf),
            j: format_percent(summary.j),
            f: format_percent(summary.f),
            summary,
            per_expression: scores,
        })
    }

    pub fn row(&self) -> String {
        format!("{} {} {}", self.jf, self.j, self.f)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Structured => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialises");
                s.push('\n');
                s
            }
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["dataset", "expressions", "J&F", "J", "F"])
                    .and_then(|_| {
                        w.write_record([
                            self.dataset.as_str(),
                            &self.expressions.to_string(),
                            &self.jf,
                            &self.j,
                            &self.f,
                        ])
                    })
                    .expect("writing to memory");
                String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
            }
        }
    }
}

pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<(), DataError> {
    fs::write(path, report.render(format)).map_err(io_err(path))
}
