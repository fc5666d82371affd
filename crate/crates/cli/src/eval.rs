//! The `eval` command: read predicted mask directories and score them.

use std::path::Path;

use rayon::prelude::*;
use rvosh_core::dataio::{read_masks, Dataset, Report};
use rvosh_core::metrics::{default_tolerance, score_expression, ExpressionScore};

use crate::error::{env_err, CliError};
use crate::run::expression_dir;

#[derive(Debug, Clone)]
pub struct EvalFailure {
    pub video_id: String,
    pub expression_id: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: Report,
    pub failures: Vec<EvalFailure>,
}

/// Scores every expression that has ground truth. Expressions that cannot be
/// scored are listed in `failures`; it is an error if none can be.
pub fn evaluate(ds: &Dataset, pred: &Path, tolerance: Option<f64>, workers: usize) -> Result<EvalOutcome, CliError> {
    if let Some(t) = tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!(
                "tolerance must be a non-negative number, got {t}"
            )));
        }
    }
    if workers == 0 {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(env_err)?;
    let results: Vec<Result<ExpressionScore, EvalFailure>> = pool.install(|| {
        ds.tasks
            .par_iter()
            .map(|task| {
                let fail = |error: String| EvalFailure {
                    video_id: task.video_id.clone(),
                    expression_id: task.expression_id.clone(),
                    error,
                };
                let gt = task
                    .ground_truth
                    .as_ref()
                    .ok_or_else(|| fail("no ground truth in manifest".into()))?;
                let video = ds.video(&task.video_id).ok_or_else(|| fail("unknown video".into()))?;
                let (h, w) = video.dims();
                let dir = expression_dir(pred, &task.video_id, &task.expression_id);
                let track = read_masks(&dir, &task.video_id).map_err(|e| fail(e.to_string()))?;
                let tol = tolerance.unwrap_or_else(|| default_tolerance(h, w));
                score_expression(&task.expression_id, &track, gt, tol).map_err(|e| fail(e.to_string()))
            })
            .collect()
    });
    let mut scores = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => scores.push(s),
            Err(f) => failures.push(f),
        }
    }
    if scores.is_empty() {
        let detail = failures
            .first()
            .map(|f| format!(": {}/{}: {}", f.video_id, f.expression_id, f.error))
            .unwrap_or_default();
        return Err(CliError::Environment(anyhow::anyhow!(
            "no expression could be scored{detail}"
        )));
    }
    let report = Report::new(ds.manifest.dataset.clone(), scores).map_err(env_err)?;
    Ok(EvalOutcome { report, failures })
}
