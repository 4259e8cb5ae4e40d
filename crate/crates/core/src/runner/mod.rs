//! Batch driver: config files, run directories, manifests, checkpoints and
//! the registry of study modes.

pub mod config;
mod evolve;
pub mod rundir;
pub mod selftest;
mod studies;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use config::{GridSpec, StudyConfig, StudyParams};
pub use evolve::{Outputs, CHECKPOINT};
pub use rundir::{Manifest, RunDir, RunState, CONFIG, MANIFEST, OUT_ENV};
pub use studies::{study_registry, Study};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Finished,
    /// Stopped at a checkpoint; resume to continue.
    Halted,
    /// Resume found nothing left to do.
    AlreadyComplete,
}

#[derive(Debug, Clone)]
pub struct Options {
    /// Stop at the first checkpoint at or after this time.
    pub halt_at: Option<f64>,
    /// Member runs executed concurrently by sweep modes.
    pub jobs: usize,
    /// Worker threads inside a run (recorded; set up by the caller).
    pub threads: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            halt_at: None,
            jobs: 1,
            threads: 1,
        }
    }
}

pub struct Context<'a> {
    pub dir: &'a mut RunDir,
    pub cfg: &'a StudyConfig,
    pub opts: &'a Options,
    /// Human-readable progress lines.
    pub out: &'a mut dyn Write,
}

/// Output root: explicit value, else `$THINFLOW_OUT`, else `./runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn new_manifest(mode: &str, cfg: &StudyConfig, opts: &Options) -> Result<Manifest> {
    let sc = cfg.scenario()?;
    let filter = cfg.run.filter.build()?;
    let filter = if filter.is_identity() {
        "off".to_string()
    } else {
        format!(
            "{}(strength={}, order={})",
            cfg.run.filter.kind, cfg.run.filter.strength, cfg.run.filter.order
        )
    };
    Ok(Manifest {
        tool: "thinflow".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: mode.into(),
        status: RunState::Running,
        started: rundir::now(),
        finished: None,
        config_hash: cfg.short_hash(),
        scenario: serde_json::to_value(&sc).expect("scenario serializes"),
        config: serde_json::to_value(cfg).expect("config serializes"),
        grid: rundir::GridEcho {
            n: cfg.grid.n,
            half_width: cfg.grid.half_width,
        },
        filter,
        blowup_factor: cfg.run.blowup_factor,
        horizon: sc.horizon(),
        threads: opts.threads,
        jobs: opts.jobs,
        bit_deterministic: opts.threads <= 1,
        error: None,
        files: Vec::new(),
    })
}

fn check_options(cfg: &StudyConfig, opts: &Options) -> Result<()> {
    if opts.jobs == 0 || opts.threads == 0 {
        return Err(Error::config("--jobs and --threads must be at least 1"));
    }
    if let Some(h) = opts.halt_at {
        if !h.is_finite() {
            return Err(Error::config("halt time must be finite"));
        }
        if cfg.run.checkpoint_every <= 0.0 {
            return Err(Error::config("halting requires run.checkpoint_every > 0"));
        }
    }
    Ok(())
}

fn finish(dir: &mut RunDir, r: Result<Outcome>) -> Result<Outcome> {
    match r {
        Ok(o) => {
            if o == Outcome::Finished && dir.manifest.status != RunState::Finished {
                dir.record(RunState::Finished, None)?;
            }
            Ok(o)
        }
        Err(e) => {
            if dir.manifest.status != RunState::Failed {
                dir.record(RunState::Failed, Some(e.to_string()))?;
            }
            Err(e)
        }
    }
}

/// Runs `mode` in a fresh directory under `root`; returns the outcome and the
/// run directory.
pub fn execute(
    mode: &str,
    cfg: &StudyConfig,
    root: &Path,
    opts: &Options,
    out: &mut dyn Write,
) -> Result<(Outcome, PathBuf)> {
    let registry = study_registry();
    let study = registry.get(mode)?;
    cfg.validate()?;
    check_options(cfg, opts)?;
    let mut dir = RunDir::create(root, new_manifest(mode, cfg, opts)?)?;
    let cpath = dir.join(CONFIG);
    std::fs::write(&cpath, cfg.to_toml()).map_err(|e| Error::io(&cpath, e))?;
    dir.record(RunState::Running, None)?;
    log::info!("{mode}: writing to {}", dir.path().display());
    let r = study.run(&mut Context {
        dir: &mut dir,
        cfg,
        opts,
        out,
    });
    let outcome = finish(&mut dir, r)?;
    Ok((outcome, dir.path().to_path_buf()))
}

/// Continues the run in `path` from its last checkpoint. A finished run is
/// left untouched. `mode`, when given, must match the recorded mode.
pub fn resume(path: &Path, mode: Option<&str>, opts: &Options, out: &mut dyn Write) -> Result<Outcome> {
    let mut dir = RunDir::open(path)?;
    if let Some(m) = mode {
        if m != dir.manifest.mode {
            return Err(Error::config(format!(
                "{} holds a '{}' run, not '{m}'",
                path.display(),
                dir.manifest.mode
            )));
        }
    }
    if dir.manifest.status == RunState::Finished {
        log::info!("{} is already complete", path.display());
        return Ok(Outcome::AlreadyComplete);
    }
    let cfg = StudyConfig::load(&dir.join(CONFIG))?;
    if cfg.short_hash() != dir.manifest.config_hash {
        return Err(Error::Checksum(dir.join(CONFIG)));
    }
    check_options(&cfg, opts)?;
    let registry = study_registry();
    let study = registry.get(&dir.manifest.mode.clone())?;
    dir.manifest.threads = opts.threads;
    dir.manifest.bit_deterministic &= opts.threads <= 1;
    dir.manifest.status = RunState::Running;
    dir.manifest.error = None;
    let r = study.resume(&mut Context {
        dir: &mut dir,
        cfg: &cfg,
        opts,
        out,
    });
    finish(&mut dir, r)
}
