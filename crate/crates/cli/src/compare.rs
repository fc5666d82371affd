//! The `compare` command: cross product of configurations, one run and one
//! evaluation per row.

use std::fs;
use std::path::Path;

use anyhow::Context;
use rvosh_core::dataio::{format_percent, Dataset, ReportFormat};
use rvosh_core::pipeline::{Mode, PipelineConfig, PromptPolicy};
use rvosh_core::sampling::SamplingStrategy;
use serde::Serialize;

use crate::error::{env_err, CliError};
use crate::eval::evaluate;
use crate::run::{run_dataset, RunOptions};

/// The axes of a comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub modes: Vec<Mode>,
    /// `None` means each mode's default strategy.
    pub samplings: Option<Vec<SamplingStrategy>>,
    pub frames: Vec<usize>,
    pub policies: Vec<PromptPolicy>,
}

fn parse_axis<T>(name: &str, text: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, CliError> {
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(|e| CliError::Usage(format!("--{name}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("--{name} lists no values; the grid is empty")));
    }
    Ok(values)
}

impl Grid {
    pub fn parse(modes: &str, samplings: Option<&str>, frames: &str, policies: &str) -> Result<Self, CliError> {
        Ok(Grid {
            modes: parse_axis("mode", modes, |s| s.parse())?,
            samplings: samplings
                .map(|s| parse_axis("sampling", s, |s| s.parse()))
                .transpose()?,
            frames: parse_axis("frames", frames, |s| {
                s.parse::<usize>().map_err(|_| format!("'{s}' is not a frame count"))
            })?,
            policies: parse_axis("prompt-policy", policies, |s| s.parse())?,
        })
    }

    /// Rows in mode, sampling, frames, policy order.
    pub fn configs(&self, seed: rvosh_core::types::Seed, tolerance: Option<f64>) -> Vec<PipelineConfig> {
        let mut rows = Vec::new();
        for &mode in &self.modes {
            let samplings = self.samplings.clone().unwrap_or_else(|| vec![mode.default_sampling()]);
            for &sampling in &samplings {
                for &frames in &self.frames {
                    for &prompt_policy in &self.policies {
                        rows.push(PipelineConfig {
                            mode,
                            sampling,
                            frames,
                            prompt_policy,
                            boundary_tolerance: tolerance,
                            seed,
                        });
                    }
                }
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub mode: String,
    pub sampling: String,
    pub frames: usize,
    pub prompt_policy: String,
    #[serde(rename = "J&F")]
    pub jf: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub failed_expressions: usize,
}

impl CompareRow {
    fn label(cfg: &PipelineConfig) -> String {
        let policy = match cfg.prompt_policy {
            PromptPolicy::All => "all".to_string(),
            PromptPolicy::FirstK(k) => format!("first{k}"),
        };
        format!("{}-{}-t{}-{policy}", cfg.mode, cfg.sampling.name(), cfg.frames)
    }
}

fn pct(v: Option<f64>) -> String {
    v.map(format_percent).unwrap_or_else(|| "-".into())
}

pub fn render_table(rows: &[CompareRow]) -> String {
    let mut s = format!(
        "{:<11} {:<15} {:>3} {:<8} {:>6} {:>6} {:>6}\n",
        "mode", "sampling", "T", "prompts", "J&F", "J", "F"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<11} {:<15} {:>3} {:<8} {:>6} {:>6} {:>6}\n",
            r.mode,
            r.sampling,
            r.frames,
            r.prompt_policy,
            pct(r.jf),
            pct(r.j),
            pct(r.f)
        ));
    }
    s
}

fn render_csv(rows: &[CompareRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mode", "sampling", "T", "prompts", "J&F", "J", "F", "failed"])?;
    for r in rows {
        w.write_record([
            r.mode.clone(),
            r.sampling.clone(),
            r.frames.to_string(),
            r.prompt_policy.clone(),
            pct(r.jf),
            pct(r.j),
            pct(r.f),
            r.failed_expressions.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Runs every grid row into `<out>/<row label>/`, then writes
/// `<out>/compare.json` or `<out>/compare.csv`.
pub fn compare(
    ds: &Dataset,
    manifest: &Path,
    configs: &[PipelineConfig],
    base: &RunOptions,
    out: &Path,
    format: ReportFormat,
) -> Result<Vec<CompareRow>, CliError> {
    if configs.is_empty() {
        return Err(CliError::Usage("the comparison grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let opts = RunOptions {
            config: cfg.clone(),
            ..base.clone()
        };
        let dir = out.join(CompareRow::label(cfg));
        let summary = run_dataset(ds, manifest, &opts, &dir)?;
        let failed = summary.failures().count();
        let scores = if summary.completed() > 0 {
            let outcome = evaluate(ds, &dir, cfg.boundary_tolerance, base.workers)?;
            Some(outcome.report.summary)
        } else {
            None
        };
        rows.push(CompareRow {
            mode: cfg.mode.to_string(),
            sampling: cfg.sampling.name().to_string(),
            frames: cfg.frames,
            prompt_policy: cfg.prompt_policy.to_string(),
            jf: scores.map(|s| s.jf),
            j: scores.map(|s| s.j),
            f: scores.map(|s| s.f),
            failed_expressions: failed,
        });
    }
    let path = out.join(format!("compare.{}", format.extension()));
    let text = match format {
        ReportFormat::Structured => {
            let mut t = serde_json::to_string_pretty(&rows).expect("rows serialise");
            t.push('\n');
            t
        }
        ReportFormat::Csv => render_csv(&rows).map_err(env_err)?,
    };
    fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(env_err)?;
    Ok(rows)
}
