//! Command-line front end: scene synthesis, sampling plans, pipeline runs,
//! evaluation and configuration sweeps.

pub mod args;
pub mod compare;
pub mod error;
pub mod eval;
pub mod run;

use std::fs;
use std::io::{self, BufWriter};
use std::path::Path;

use anyhow::Context;
use rvosh_core::backends::stub::{serve_stub, StubExit, StubOptions};
use rvosh_core::backends::{ToyNoiseConfig, ToyPropagatorParams};
use rvosh_core::dataio::{
    import_mevis_meta, load_manifest, preset, write_report, write_scene_dataset, Dataset, SceneDataset, PRESET_NAMES,
};
use rvosh_core::pipeline::PipelineConfig;
use rvosh_core::sampling;
use rvosh_core::types::Seed;

use args::{BackendArgs, BackendKind, Cli, Command, CompareArgs, EvalArgs, PlanArgs, RunArgs, StubArgs, SynthArgs};
use error::env_err;
pub use error::CliError;
pub use eval::{evaluate, EvalOutcome};
pub use run::{run_dataset, BackendChoice, RunOptions, RunSummary};

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Plan(a) => cmd_plan(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::ImportMevis(a) => {
            let manifest = import_mevis_meta(&a.meta, &a.annotations, a.frames.as_deref()).map_err(env_err)?;
            manifest.save(&a.out).map_err(env_err)?;
            println!(
                "{}: {} videos, {} expressions",
                a.out.display(),
                manifest.videos.len(),
                manifest.expressions.len()
            );
            Ok(())
        }
        Command::StubWorker(a) => cmd_stub_worker(&a),
    }
}

fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let mut ds = match preset(&a.source) {
        Some(ds) => ds,
        None if Path::new(&a.source).is_file() => SceneDataset::load(Path::new(&a.source)).map_err(env_err)?,
        None => {
            return Err(CliError::Usage(format!(
                "'{}' is neither a preset ({}) nor a scene file",
                a.source,
                PRESET_NAMES.join(", ")
            )))
        }
    };
    if let Some(seed) = a.seed {
        for e in &mut ds.scenes {
            e.scene.seed = Seed(seed);
        }
    }
    let path = write_scene_dataset(&ds, &a.out).map_err(|e| match e {
        rvosh_core::dataio::DataError::Scene(m) => CliError::Usage(format!("invalid scene: {m}")),
        other => env_err(other),
    })?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_plan(a: &PlanArgs) -> Result<(), CliError> {
    let plan = sampling::plan(a.strategy, a.frames_total, a.frames, Seed(a.seed))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let line: Vec<String> = plan.indices.iter().map(usize::to_string).collect();
    println!("{}", line.join(" "));
    Ok(())
}

fn backend_choice(b: &BackendArgs, seed: Seed) -> Result<BackendChoice, CliError> {
    match b.backend {
        BackendKind::Toy => Ok(BackendChoice::Toy {
            noise: ToyNoiseConfig {
                swap_probability: b.swap_probability,
                dilation_radius: b.dilation,
                seed,
            },
            propagator: ToyPropagatorParams::default(),
        }),
        BackendKind::External => {
            let command = b
                .backend_cmd
                .clone()
                .filter(|c| !c.trim().is_empty())
                .ok_or_else(|| CliError::Usage("--backend external needs --backend-cmd".into()))?;
            Ok(BackendChoice::External {
                command,
                timeout_secs: b.backend_timeout,
            })
        }
    }
}

fn load(path: &Path) -> Result<Dataset, CliError> {
    load_manifest(path)
        .with_context(|| format!("loading manifest {}", path.display()))
        .map_err(env_err)
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let seed = Seed(a.seed);
    let opts = RunOptions {
        config: PipelineConfig {
            mode: a.mode,
            sampling: a.sampling.unwrap_or(a.mode.default_sampling()),
            frames: a.frames,
            prompt_policy: a.prompt_policy,
            boundary_tolerance: a.tolerance,
            seed,
        },
        backend: backend_choice(&a.backend, seed)?,
        workers: a.backend.workers,
    };
    opts.config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ds = load(&a.manifest)?;
    let summary = run_dataset(&ds, &a.manifest, &opts, &a.out)?;
    let failed = summary.failures().count();
    println!(
        "{} of {} expressions completed; output in {}",
        summary.completed(),
        summary.records.len(),
        a.out.display()
    );
    for f in summary.failures() {
        eprintln!(
            "failed: {}/{}: {}",
            f.video_id,
            f.expression_id,
            f.error.as_deref().unwrap_or("")
        );
    }
    if failed > 0 && summary.completed() == 0 {
        return Err(CliError::Environment(anyhow::anyhow!(
            "all {failed} expressions failed"
        )));
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let ds = load(&a.manifest)?;
    let outcome = evaluate(&ds, &a.pred, a.tolerance, a.workers)?;
    let path = a
        .report
        .clone()
        .unwrap_or_else(|| a.pred.join(format!("report.{}", a.format.extension())));
    write_report(&outcome.report, &path, a.format).map_err(env_err)?;
    println!("J&F J F");
    println!("{}", outcome.report.row());
    for f in &outcome.failures {
        eprintln!("not scored: {}/{}: {}", f.video_id, f.expression_id, f.error);
    }
    if !outcome.failures.is_empty() {
        return Err(CliError::Partial(format!(
            "{} of {} expressions could not be scored",
            outcome.failures.len(),
            ds.tasks.len()
        )));
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<(), CliError> {
    let grid = compare::Grid::parse(&a.mode, a.sampling.as_deref(), &a.frames, &a.prompt_policy)?;
    let seed = Seed(a.seed);
    let configs = grid.configs(seed, a.tolerance);
    for c in &configs {
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let base = RunOptions {
        config: configs[0].clone(),
        backend: backend_choice(&a.backend, seed)?,
        workers: a.backend.workers,
    };
    let ds = load(&a.manifest)?;
    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(env_err)?;
    let rows = compare::compare(&ds, &a.manifest, &configs, &base, &a.out, a.format)?;
    print!("{}", compare::render_table(&rows));
    let failed: usize = rows.iter().map(|r| r.failed_expressions).sum();
    if failed > 0 {
        return Err(CliError::Partial(format!(
            "{failed} expression runs failed across the grid"
        )));
    }
    Ok(())
}

fn cmd_stub_worker(a: &StubArgs) -> Result<(), CliError> {
    let opts = StubOptions {
        protocol: a.protocol,
        fault: a
            .fault
            .as_deref()
            .map(str::parse)
            .transpose()
            .map_err(CliError::Usage)?,
        fault_trigger: a.fault_on.clone(),
    };
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    match serve_stub(stdin, stdout, &opts) {
        Ok(StubExit::InputClosed) => Ok(()),
        Ok(StubExit::Crashed) => Err(CliError::Environment(anyhow::anyhow!("injected crash"))),
        Err(e) => Err(env_err(e)),
    }
}
