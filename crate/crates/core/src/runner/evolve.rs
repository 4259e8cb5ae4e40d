//! Time-dependent studies: per-frame outputs, checkpoints and resume.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rundir::{write_atomic, RunDir, RunState};
use super::{Outcome, StudyConfig};
use crate::diagnostics::output::{self, CsvSink, Schema};
use crate::diagnostics::{
    angular_measure, annulus_radii, classify_case, energy_transfer_check, labelled_support_gap,
    scale_energy_split, CaseTracker, ScaleEnergySplit,
};
use crate::evolution::{DiagnosticsFrame, EulerState, Progress, RunObserver, RunStatus, Simulation};
use crate::initcond::{build_components, ComponentLabel, VorticityScenario};
use crate::lagrangian::{seed_standard_sets, thinning_scan, TracerSet};
use crate::spectral::snapshot;
use crate::{Error, Result};

pub const CHECKPOINT: &str = "checkpoint";
const STATE: &str = "state.json";
const TRACERS_BIN: &str = "tracers.bin";

/// Which per-frame tables a study writes besides `frames.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub tracers: bool,
    pub transfer: bool,
    pub angular: bool,
    pub events: bool,
}

impl Outputs {
    fn schemas(&self) -> Vec<Schema> {
        let mut s = vec![output::FRAMES];
        if self.transfer {
            s.push(output::TRANSFER);
        }
        if self.angular {
            s.push(output::IMEASURE);
            s.push(output::CLASSIFY);
        }
        if self.tracers {
            s.push(output::TRACERS);
        }
        if self.events {
            s.push(output::EVENTS);
        }
        s
    }
}

/// Observer state that must survive a checkpoint. Floats are kept as bit
/// patterns so a resumed run continues from identical values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Carry {
    tracker: CaseTracker,
    /// One character per tracer: `1` once a thinning event was reported.
    fired: String,
    initial_split: Option<[u64; 3]>,
    initial_sups: Option<[u64; 2]>,
    merged_frames: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointState {
    steps: u64,
    frames: u64,
    checkpoints: u64,
    last_dt_bits: u64,
    labels: Vec<ComponentLabel>,
    has_tracers: bool,
    csv_bytes: BTreeMap<String, u64>,
    carry: Carry,
}

fn split_bits(s: &ScaleEnergySplit) -> [u64; 3] {
    [s.energy_l.to_bits(), s.energy_s.to_bits(), s.cross.to_bits()]
}

fn split_from_bits(b: [u64; 3]) -> ScaleEnergySplit {
    ScaleEnergySplit {
        energy_l: f64::from_bits(b[0]),
        energy_s: f64::from_bits(b[1]),
        cross: f64::from_bits(b[2]),
    }
}

struct Writer<'a> {
    dir: &'a mut RunDir,
    scenario: VorticityScenario,
    cfg: StudyConfig,
    outputs: Outputs,
    sinks: BTreeMap<&'static str, CsvSink>,
    carry: Carry,
}

impl Writer<'_> {
    fn sink(&mut self, schema: Schema) -> &mut CsvSink {
        self.sinks.get_mut(schema.file).expect("sink opened for schema")
    }

    fn write_tracers(&mut self, t: f64, set: &TracerSet) -> Result<()> {
        let sink = self.sink(output::TRACERS);
        for tr in set.iter() {
            sink.write_row(&[
                t.into(),
                tr.label.as_str().into(),
                tr.x0[0].into(),
                tr.x0[1].into(),
                tr.x[0].into(),
                tr.x[1].into(),
                tr.j[0][0].into(),
                tr.j[0][1].into(),
                tr.j[1][0].into(),
                tr.j[1][1].into(),
            ])?;
        }
        Ok(())
    }

    fn transfer_row(&mut self, st: &EulerState) -> Result<()> {
        let (Some(l), Some(s)) = (st.label(ComponentLabel::Large), st.label(ComponentLabel::Small)) else {
            return Ok(());
        };
        let split = scale_energy_split(l, s);
        let initial = match self.carry.initial_split {
            Some(b) => split_from_bits(b),
            None => {
                self.carry.initial_split = Some(split_bits(&split));
                self.carry.initial_sups = Some([l.sup().to_bits(), s.sup().to_bits()]);
                split
            }
        };
        let sups = self.carry.initial_sups.expect("set with the initial split");
        let gap = labelled_support_gap(l, f64::from_bits(sups[0]), s, f64::from_bits(sups[1]));
        if gap <= 0.0 {
            self.carry.merged_frames += 1;
            log::warn!(
                "t = {}: large- and small-scale supports have merged; labelled enstrophy is no longer separately conserved",
                st.time()
            );
        }
        let row = energy_transfer_check(st.time(), &initial, &split);
        self.sink(output::TRANSFER).write_row(&[
            row.t.into(),
            row.energy_l.into(),
            row.energy_s.into(),
            row.cross.into(),
            row.lhs.into(),
            row.rhs.into(),
            row.pass.into(),
        ])
    }

    fn angular_rows(&mut self, t: f64, set: &TracerSet) -> Result<()> {
        let (lo, hi) = self.scenario.annulus();
        let radii = annulus_radii(lo, hi, self.cfg.study.radii);
        let samples = angular_measure(set, &radii, self.cfg.study.dtheta, self.scenario.grid.dx())?;
        let sink = self.sink(output::IMEASURE);
        for s in &samples {
            sink.write_row(&[t.into(), s.r0.into(), s.measure.into(), s.dtheta.into()])?;
        }
        let v = classify_case(&samples, self.scenario.m_threshold)?;
        self.carry.tracker.push(&v);
        let cumulative = self.carry.tracker.verdict();
        self.sink(output::CLASSIFY).write_row(&[
            t.into(),
            v.fraction_low.into(),
            v.uncertainty.into(),
            v.case.as_str().into(),
            cumulative.as_str().into(),
        ])
    }

    fn event_rows(&mut self, t: f64, set: &TracerSet) -> Result<()> {
        let dir = self.cfg.study.direction;
        let m = self.scenario.m_threshold;
        if self.carry.fired.len() != set.len() {
            self.carry.fired = "0".repeat(set.len());
        }
        let scan = thinning_scan(set, t, dir, m)?;
        if scan.events.is_empty() {
            return Ok(());
        }
        let mut fired: Vec<u8> = self.carry.fired.clone().into_bytes();
        let mut rows = Vec::new();
        for (k, tr) in set.iter().enumerate() {
            if fired[k] == b'1' || tr.stretch(dir) < m {
                continue;
            }
            fired[k] = b'1';
            rows.push([
                t.into(),
                tr.label.as_str().into(),
                tr.x0[0].into(),
                tr.x0[1].into(),
                dir[0].into(),
                dir[1].into(),
                tr.stretch(dir).into(),
                m.into(),
            ]);
        }
        self.carry.fired = String::from_utf8(fired).expect("ascii flags");
        let sink = self.sink(output::EVENTS);
        for r in &rows {
            sink.write_row(r)?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<BTreeMap<String, u64>> {
        let mut lengths = BTreeMap::new();
        for (name, sink) in self.sinks.iter_mut() {
            sink.flush()?;
            let p = sink.path().to_path_buf();
            let len = fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            lengths.insert((*name).to_string(), len);
        }
        Ok(lengths)
    }
}

impl RunObserver for Writer<'_> {
    fn frame(&mut self, sim: &Simulation, frame: &DiagnosticsFrame) -> Result<()> {
        let row: Vec<output::Cell> = frame.values().iter().map(|v| (*v).into()).collect();
        self.sink(output::FRAMES).write_row(&row)?;
        let st = sim.state();
        if self.outputs.transfer {
            self.transfer_row(st)?;
        }
        if let Some(set) = sim.tracers() {
            if self.outputs.angular {
                self.angular_rows(st.time(), set)?;
            }
            if self.outputs.events {
                self.event_rows(st.time(), set)?;
            }
        }
        Ok(())
    }

    fn checkpoint(&mut self, sim: &Simulation) -> Result<()> {
        let st = sim.state();
        let p = sim.progress();
        if self.outputs.tracers {
            if let Some(set) = sim.tracers() {
                self.write_tracers(st.time(), set)?;
            }
        }
        let csv_bytes = self.flush()?;
        let snaps = self.dir.join("snapshots");
        snapshot::write(&snaps.join(format!("omega_{:03}.thnf", p.checkpoints - 1)), st.omega(), st.time())?;

        let tmp = self.dir.join(&format!("{CHECKPOINT}.tmp"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        fs::create_dir(&tmp).map_err(|e| Error::io(&tmp, e))?;
        snapshot::write(&tmp.join("omega.thnf"), st.omega(), st.time())?;
        for (l, f) in st.labels() {
            snapshot::write(&tmp.join(format!("label_{}.thnf", l.as_str())), f, st.time())?;
        }
        if let Some(set) = sim.tracers() {
            let path = tmp.join(TRACERS_BIN);
            fs::write(&path, set.encode()).map_err(|e| Error::io(&path, e))?;
        }
        let state = CheckpointState {
            steps: p.steps,
            frames: p.frames,
            checkpoints: p.checkpoints,
            last_dt_bits: p.last_dt.to_bits(),
            labels: st.labels().iter().map(|(l, _)| *l).collect(),
            has_tracers: sim.tracers().is_some(),
            csv_bytes,
            carry: self.carry.clone(),
        };
        let text = serde_json::to_string_pretty(&state).expect("checkpoint state serializes");
        write_atomic(&tmp.join(STATE), text.as_bytes())?;
        let dest = self.dir.join(CHECKPOINT);
        if dest.exists() {
            fs::remove_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
        }
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))?;
        self.dir.record(RunState::Running, None)
    }
}

fn open_sinks(dir: &RunDir, outputs: Outputs, append: bool) -> Result<BTreeMap<&'static str, CsvSink>> {
    let mut sinks = BTreeMap::new();
    for s in outputs.schemas() {
        let sink = if append {
            CsvSink::append(dir.path(), s)?
        } else {
            CsvSink::create(dir.path(), s)?
        };
        sinks.insert(s.file, sink);
    }
    Ok(sinks)
}

/// Starts a fresh run in `dir`.
pub fn start(dir: &mut RunDir, cfg: &StudyConfig, outputs: Outputs, halt_at: Option<f64>) -> Result<Outcome> {
    let scenario = cfg.scenario()?;
    let comps = build_components(&scenario)?;
    let state = EulerState::from_components(&comps)?;
    let tracers = if outputs.tracers || outputs.angular || outputs.events {
        Some(seed_standard_sets(&scenario, &cfg.tracers)?)
    } else {
        None
    };
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(|e| Error::io(&snaps, e))?;
    snapshot::write(&snaps.join("omega_initial.thnf"), state.omega(), 0.0)?;
    let sim = Simulation::new(state, cfg.run.clone(), tracers)?;
    let sinks = open_sinks(dir, outputs, false)?;
    drive(dir, cfg, scenario, outputs, sim, sinks, Carry::default(), halt_at)
}

/// Continues a halted or interrupted run from its last checkpoint.
pub fn resume(dir: &mut RunDir, cfg: &StudyConfig, outputs: Outputs, halt_at: Option<f64>) -> Result<Outcome> {
    let ck = dir.join(CHECKPOINT);
    let state_path = ck.join(STATE);
    if !state_path.is_file() {
        return Err(Error::config(format!("{} has no checkpoint to resume from", dir.path().display())));
    }
    // checkpoint files first, then the tables they describe
    verify_prefix(dir, &format!("{CHECKPOINT}/"))?;
    let text = fs::read_to_string(&state_path).map_err(|e| Error::io(&state_path, e))?;
    let saved: CheckpointState = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: state_path.clone(),
        reason: e.to_string(),
    })?;
    for (name, len) in &saved.csv_bytes {
        truncate(&dir.join(name), *len)?;
    }
    dir.verify()?;

    let (omega, t) = snapshot::read(&ck.join("omega.thnf"))?;
    let mut labels = Vec::new();
    for l in &saved.labels {
        let (f, tl) = snapshot::read(&ck.join(format!("label_{}.thnf", l.as_str())))?;
        if tl.to_bits() != t.to_bits() {
            return Err(Error::Checksum(ck.join(format!("label_{}.thnf", l.as_str()))));
        }
        labels.push((*l, f));
    }
    let state = EulerState::with_labels(t, omega, labels)?;
    let tracers = if saved.has_tracers {
        let p = ck.join(TRACERS_BIN);
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        Some(TracerSet::decode(&bytes).ok_or_else(|| Error::Format {
            path: p.clone(),
            reason: "truncated or malformed tracer set".into(),
        })?)
    } else {
        None
    };
    let progress = Progress {
        steps: saved.steps,
        frames: saved.frames,
        checkpoints: saved.checkpoints,
        last_dt: f64::from_bits(saved.last_dt_bits),
    };
    let sim = Simulation::restore(state, cfg.run.clone(), tracers, progress)?;
    let sinks = open_sinks(dir, outputs, true)?;
    log::info!("resuming {} at t = {t}", dir.path().display());
    drive(dir, cfg, cfg.scenario()?, outputs, sim, sinks, saved.carry, halt_at)
}

fn verify_prefix(dir: &RunDir, prefix: &str) -> Result<()> {
    let listed: Vec<_> = dir.manifest.files.iter().filter(|f| f.path.starts_with(prefix)).collect();
    if listed.is_empty() {
        return Err(Error::Checksum(dir.join(CHECKPOINT)));
    }
    for f in listed {
        let p = dir.join(&f.path);
        if !p.is_file() {
            return Err(Error::Checksum(p));
        }
        let (bytes, sha) = super::rundir::sha256_file(&p)?;
        if bytes != f.bytes || sha != f.sha256 {
            return Err(Error::Checksum(p));
        }
    }
    Ok(())
}

fn truncate(path: &Path, len: u64) -> Result<()> {
    let f = fs::OpenOptions::new()
        .write(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let have = f.metadata().map_err(|e| Error::io(path, e))?.len();
    if have < len {
        return Err(Error::Checksum(path.to_path_buf()));
    }
    f.set_len(len).map_err(|e| Error::io(path, e))
}

#[allow(clippy::too_many_arguments)]
fn drive(
    dir: &mut RunDir,
    cfg: &StudyConfig,
    scenario: VorticityScenario,
    outputs: Outputs,
    mut sim: Simulation,
    sinks: BTreeMap<&'static str, CsvSink>,
    carry: Carry,
    halt_at: Option<f64>,
) -> Result<Outcome> {
    if halt_at.is_some() && cfg.run.checkpoint_every <= 0.0 {
        return Err(Error::config("halting requires run.checkpoint_every > 0"));
    }
    let mut w = Writer {
        dir,
        scenario,
        cfg: cfg.clone(),
        outputs,
        sinks,
        carry,
    };
    let status = match sim.run(&mut w, halt_at) {
        Ok(s) => s,
        Err(e) => {
            let _ = w.flush();
            let msg = e.to_string();
            w.dir.record(RunState::Failed, Some(msg))?;
            return Err(e);
        }
    };
    match status {
        RunStatus::Halted => {
            w.dir.record(RunState::Halted, None)?;
            Ok(Outcome::Halted)
        }
        RunStatus::Finished => {
            let st = sim.state();
            if outputs.tracers {
                if let Some(set) = sim.tracers() {
                    w.write_tracers(st.time(), set)?;
                }
            }
            w.flush()?;
            w.sinks.clear();
            snapshot::write(&w.dir.join("snapshots/omega_final.thnf"), st.omega(), st.time())?;
            let summary = summarize(w.dir, &w.carry, sim.progress())?;
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            write_atomic(&w.dir.join("summary.json"), text.as_bytes())?;
            w.dir.record(RunState::Finished, None)?;
            Ok(Outcome::Finished)
        }
    }
}

fn column(rows: &[Vec<String>], header: &[String], name: &str) -> Vec<String> {
    let k = header.iter().position(|h| h == name).expect("documented column");
    rows.iter().map(|r| r[k].clone()).collect()
}

fn parse_f(v: &[String]) -> Vec<f64> {
    v.iter().map(|s| s.parse().unwrap_or(f64::NAN)).collect()
}

/// Headline numbers derived from the tables on disk.
fn summarize(dir: &RunDir, carry: &Carry, p: Progress) -> Result<serde_json::Value> {
    let (h, rows) = output::read_table(&dir.join(output::FRAMES.file))?;
    let drift = |name: &str| {
        let v = parse_f(&column(&rows, &h, name));
        let v0 = v[0];
        v.iter().fold(0.0f64, |m, x| m.max((x - v0).abs())) / v0.abs().max(f64::MIN_POSITIVE)
    };
    let mut out = serde_json::json!({
        "frames": rows.len(),
        "steps": p.steps,
        "energy_drift": drift("energy"),
        "enstrophy_drift": drift("enstrophy"),
        "merged_frames": carry.merged_frames,
    });
    let transfer = dir.join(output::TRANSFER.file);
    if transfer.is_file() {
        let (h, rows) = output::read_table(&transfer)?;
        let all = column(&rows, &h, "pass").iter().all(|s| s == "true");
        out["transfer_all_pass"] = all.into();
    }
    let classify = dir.join(output::CLASSIFY.file);
    if classify.is_file() {
        let (h, rows) = output::read_table(&classify)?;
        if let Some(last) = column(&rows, &h, "cumulative").last() {
            out["case"] = last.clone().into();
        }
    }
    Ok(out)
}
