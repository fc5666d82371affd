//! The `run` command: every expression of a dataset through the pipeline,
//! in parallel, with one collector thread owning the output directory.

use std::fs;
use std::path::{Component, Path, PathBuf};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use anyhow::Context;
use rayon::prelude::*;
use rvosh_core::backends::{
    BackendError, PredictorBackend, PredictorRequest, PropagateRequest, PropagatorBackend, ToyNoiseConfig,
    ToyPropagator, ToyPropagatorParams, WorkerEndpoint,
};
use rvosh_core::dataio::{write_masks, Dataset};
use rvosh_core::pipeline::{run, PipelineConfig, PipelineOutput};
use rvosh_core::types::{BinaryMask, MaskTrack};
use serde::Serialize;

use crate::error::{env_err, CliError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendChoice {
    Toy {
        noise: ToyNoiseConfig,
        propagator: ToyPropagatorParams,
    },
    External {
        command: String,
        timeout_secs: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOptions {
    pub config: PipelineConfig,
    pub backend: BackendChoice,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpressionRecord {
    pub video_id: String,
    pub expression_id: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_frames: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt_frames: Option<Vec<usize>>,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    manifest: String,
    dataset: &'a str,
    options: &'a RunOptions,
    total_millis: u128,
    expressions: &'a [ExpressionRecord],
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<ExpressionRecord>,
}

impl RunSummary {
    pub fn failures(&self) -> impl Iterator<Item = &ExpressionRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }

    pub fn completed(&self) -> usize {
        self.records.len() - self.failures().count()
    }
}

/// External workers, spawned lazily up to one per concurrent expression.
struct EndpointPool {
    command: String,
    timeout: Duration,
    idle: Mutex<Vec<WorkerEndpoint>>,
}

impl EndpointPool {
    fn with<R>(&self, f: impl FnOnce(&WorkerEndpoint) -> Result<R, BackendError>) -> Result<R, BackendError> {
        let taken = self.idle.lock().expect("pool lock").pop();
        let ep = match taken {
            Some(ep) => ep,
            None => WorkerEndpoint::spawn(&self.command, self.timeout)?,
        };
        let result = f(&ep);
        self.idle.lock().expect("pool lock").push(ep);
        result
    }
}

impl PredictorBackend for EndpointPool {
    fn predict(&self, req: &PredictorRequest<'_>) -> Result<MaskTrack, BackendError> {
        self.with(|ep| ep.predict(req))
    }
}

impl PropagatorBackend for EndpointPool {
    fn propagate(&self, req: &PropagateRequest<'_>) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
        self.with(|ep| ep.propagate(req))
    }
}

/// Ids become directory names, so they must be single plain components.
fn safe_component(id: &str) -> bool {
    let mut parts = Path::new(id).components();
    matches!((parts.next(), parts.next()), (Some(Component::Normal(_)), None))
}

pub fn expression_dir(out: &Path, video_id: &str, expression_id: &str) -> PathBuf {
    out.join(video_id).join(expression_id)
}

fn check_out_dir(manifest: &Path, out: &Path) -> Result<(), CliError> {
    let manifest_dir = manifest
        .parent()
        .map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p })
        .unwrap_or(Path::new("."));
    let a = fs::canonicalize(manifest_dir).ok();
    let b = fs::canonicalize(out).ok();
    if a.is_some() && a == b {
        return Err(CliError::Usage(format!(
            "output directory {} is the dataset directory",
            out.display()
        )));
    }
    Ok(())
}

/// Runs every expression and writes `<out>/<video>/<expression>/NNNNN.png`
/// plus `<out>/run.json`.
pub fn run_dataset(ds: &Dataset, manifest: &Path, opts: &RunOptions, out: &Path) -> Result<RunSummary, CliError> {
    opts.config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if opts.workers == 0 {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    check_out_dir(manifest, out)?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(env_err)?;

    let start = Instant::now();
    let (predictor, propagator): (Box<dyn PredictorBackend>, Box<dyn PropagatorBackend>) = match &opts.backend {
        BackendChoice::Toy { noise, propagator } => {
            noise.validate().map_err(CliError::Usage)?;
            (
                Box::new(ds.toy_predictor(*noise)),
                Box::new(ToyPropagator::new(*propagator)),
            )
        }
        BackendChoice::External { command, timeout_secs } => {
            let timeout = Duration::from_secs(*timeout_secs);
            // fail fast if the worker cannot start at all
            let first = WorkerEndpoint::spawn(command, timeout)
                .with_context(|| format!("starting backend worker '{command}'"))
                .map_err(env_err)?;
            let pool = || EndpointPool {
                command: command.clone(),
                timeout,
                idle: Mutex::new(Vec::new()),
            };
            let predictors = pool();
            predictors.idle.lock().expect("pool lock").push(first);
            (Box::new(predictors), Box::new(pool()))
        }
    };
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .context("building worker pool")
        .map_err(env_err)?;

    let mut records: Vec<Option<ExpressionRecord>> = vec![None; ds.tasks.len()];
    let (tx, rx) = mpsc::channel::<(usize, Result<PipelineOutput, String>, u128)>();
    let mut write_error = None;
    std::thread::scope(|scope| {
        let (predictor, propagator) = (predictor.as_ref(), propagator.as_ref());
        scope.spawn(move || {
            threads.install(|| {
                ds.tasks.par_iter().enumerate().for_each_with(tx, |tx, (i, task)| {
                    let t0 = Instant::now();
                    let result = if !safe_component(&task.video_id) || !safe_component(&task.expression_id) {
                        Err(format!(
                            "ids '{}'/'{}' cannot be used as directory names",
                            task.video_id, task.expression_id
                        ))
                    } else {
                        match ds.video(&task.video_id) {
                            Some(video) => {
                                run(video, task, &opts.config, predictor, propagator).map_err(|e| format!("{e:#}"))
                            }
                            None => Err(format!("unknown video '{}'", task.video_id)),
                        }
                    };
                    let _ = tx.send((i, result, t0.elapsed().as_millis()));
                });
            });
        });
        // single collector: the only writer to `out`
        for (i, result, millis) in rx {
            let task = &ds.tasks[i];
            let mut record = ExpressionRecord {
                video_id: task.video_id.clone(),
                expression_id: task.expression_id.clone(),
                status: "ok",
                error: None,
                sampled_frames: None,
                prompt_frames: None,
                millis,
            };
            match result {
                Ok(output) => {
                    let dir = expression_dir(out, &task.video_id, &task.expression_id);
                    let written = match fs::remove_dir_all(&dir) {
                        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(anyhow::Error::from(e)),
                        _ => write_masks(&output.track, &dir).map_err(anyhow::Error::from),
                    };
                    if let Err(e) = written {
                        write_error.get_or_insert(e.context(format!("writing {}", dir.display())));
                    }
                    record.sampled_frames = Some(output.plan.indices);
                    record.prompt_frames = Some(output.prompt_frames);
                }
                Err(e) => {
                    log::error!("{}/{}: {e}", task.video_id, task.expression_id);
                    record.status = "failed";
                    record.error = Some(e);
                }
            }
            records[i] = Some(record);
        }
    });
    if let Some(e) = write_error {
        return Err(env_err(e));
    }
    let records: Vec<ExpressionRecord> = records.into_iter().map(|r| r.expect("every task reported")).collect();
    let meta = RunMetadata {
        tool: "rvosh",
        version: env!("CARGO_PKG_VERSION"),
        manifest: manifest.display().to_string(),
        dataset: &ds.manifest.dataset,
        options: opts,
        total_millis: start.elapsed().as_millis(),
        expressions: &records,
    };
    let path = out.join("run.json");
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    text.push('\n');
    fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(env_err)?;
    Ok(RunSummary { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_must_be_plain_components() {
        assert!(safe_component("video-1"));
        assert!(!safe_component("a/b"));
        assert!(!safe_component(".."));
        assert!(!safe_component(""));
        assert!(!safe_component("/abs"));
    }
}
