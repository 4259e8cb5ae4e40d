use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::filter::{FilterConfig, SpectralFilter};
use super::state::EulerState;
use super::stepper::{cfl_dt, step_rk4};
use crate::initcond::{build_components, ComponentLabel, VorticityScenario};
use crate::lagrangian::{advect_tracers, FlowSnapshot, TracerSet, VelocityEval};
use crate::spectral::{norms, velocity_inner};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_end: f64,
    pub cfl: f64,
    /// Interval between diagnostics frames.
    pub output_every: f64,
    /// Interval between checkpoints; zero disables them.
    pub checkpoint_every: f64,
    pub filter: FilterConfig,
    /// Largest tolerated one-step growth of `sup|omega|`.
    pub blowup_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: 0.5,
            cfl: 0.25,
            output_every: 0.05,
            checkpoint_every: 0.25,
            filter: FilterConfig::default(),
            blowup_factor: 10.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end must be non-negative"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.output_every > 0.0 && self.output_every.is_finite()) {
            return Err(Error::config("output_every must be positive"));
        }
        if !(self.checkpoint_every >= 0.0 && self.checkpoint_every.is_finite()) {
            return Err(Error::config("checkpoint_every must be non-negative"));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::config("blowup_factor must exceed 1"));
        }
        Ok(())
    }
}

/// One row of `frames.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsFrame {
    pub t: f64,
    /// `||u||^2`.
    pub energy: f64,
    /// `||omega||^2`.
    pub enstrophy: f64,
    /// `||grad omega||`.
    pub palinstrophy: f64,
    pub energy_l: f64,
    pub energy_s: f64,
    pub cross_energy: f64,
    /// Distance of `omega` from odd-odd symmetry in L2.
    pub asym: f64,
    pub sup_u: f64,
    /// Step that produced this frame (zero for the initial frame).
    pub dt: f64,
}

impl DiagnosticsFrame {
    pub const COLUMNS: [&'static str; 10] = [
        "t",
        "energy",
        "enstrophy",
        "palinstrophy",
        "energy_L",
        "energy_S",
        "cross_energy",
        "asym",
        "sup_u",
        "dt",
    ];

    pub fn of(state: &EulerState, dt: f64) -> Self {
        let w = state.omega();
        let nm = norms(w);
        let (el, es, cross) = match (
            state.label(ComponentLabel::Large),
            state.label(ComponentLabel::Small),
        ) {
            (Some(l), Some(s)) => (
                velocity_inner(l, l),
                velocity_inner(s, s),
                velocity_inner(l, s),
            ),
            (Some(l), None) => (velocity_inner(l, l), 0.0, 0.0),
            _ => (0.0, 0.0, 0.0),
        };
        Self {
            t: state.time(),
            energy: velocity_inner(w, w),
            enstrophy: nm.l2 * nm.l2,
            palinstrophy: nm.h1_seminorm,
            energy_l: el,
            energy_s: es,
            cross_energy: cross,
            asym: w.odd_asymmetry(),
            sup_u: state.velocity().sup(),
            dt,
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.energy,
            self.enstrophy,
            self.palinstrophy,
            self.energy_l,
            self.energy_s,
            self.cross_energy,
            self.asym,
            self.sup_u,
            self.dt,
        ]
    }
}

/// Position in the output and checkpoint schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Progress {
    pub steps: u64,
    pub frames: u64,
    pub checkpoints: u64,
    pub last_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Finished,
    /// Stopped at a checkpoint on request.
    Halted,
}

/// Hooks called by [`Simulation::run`].
pub trait RunObserver {
    fn frame(&mut self, sim: &Simulation, frame: &DiagnosticsFrame) -> Result<()>;

    fn checkpoint(&mut self, _sim: &Simulation) -> Result<()> {
        Ok(())
    }

    /// Called after every step with the stage velocities, if tracked.
    fn step(&mut self, _sim: &Simulation, _stages: Option<&[FlowSnapshot; 4]>) -> Result<()> {
        Ok(())
    }
}

/// Observer that keeps every frame in memory.
#[derive(Debug, Default)]
pub struct Collect {
    pub frames: Vec<DiagnosticsFrame>,
}

impl RunObserver for Collect {
    fn frame(&mut self, _sim: &Simulation, frame: &DiagnosticsFrame) -> Result<()> {
        self.frames.push(*frame);
        Ok(())
    }
}

pub struct Simulation {
    state: EulerState,
    config: RunConfig,
    filter: Arc<dyn SpectralFilter>,
    tracers: Option<TracerSet>,
    progress: Progress,
    track_stages: bool,
}

impl Simulation {
    pub fn new(state: EulerState, config: RunConfig, tracers: Option<TracerSet>) -> Result<Self> {
        Self::restore(state, config, tracers, Progress::default())
    }

    /// Rebuilds a simulation from checkpointed parts.
    pub fn restore(
        state: EulerState,
        config: RunConfig,
        tracers: Option<TracerSet>,
        progress: Progress,
    ) -> Result<Self> {
        config.validate()?;
        let filter = config.filter.build()?;
        let track_stages = tracers.is_some();
        Ok(Self {
            state,
            config,
            filter,
            tracers,
            progress,
            track_stages,
        })
    }

    /// Forces stage velocities to be computed and passed to observers even
    /// without tracers.
    pub fn track_stages(mut self, on: bool) -> Self {
        self.track_stages = on || self.tracers.is_some();
        self
    }

    pub fn state(&self) -> &EulerState {
        &self.state
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn filter(&self) -> &dyn SpectralFilter {
        self.filter.as_ref()
    }

    pub fn tracers(&self) -> Option<&TracerSet> {
        self.tracers.as_ref()
    }

    pub fn progress(&self) -> Progress {
        self.progress
    }

    pub fn into_parts(self) -> (EulerState, Option<TracerSet>) {
        (self.state, self.tracers)
    }

    fn output_time(&self, k: u64) -> f64 {
        (k as f64 * self.config.output_every).min(self.config.t_end)
    }

    fn checkpoint_time(&self, k: u64) -> f64 {
        if self.config.checkpoint_every > 0.0 {
            (k as f64 * self.config.checkpoint_every).min(self.config.t_end)
        } else {
            f64::INFINITY
        }
    }

    pub fn finished(&self) -> bool {
        self.progress.frames > 0 && self.state.time() >= self.config.t_end
    }

    /// Advances to `t_end`, or to the first checkpoint at or after
    /// `halt_at`. Step boundaries land exactly on output and checkpoint
    /// times, so a halted run resumes onto the same step sequence.
    pub fn run(&mut self, obs: &mut dyn RunObserver, halt_at: Option<f64>) -> Result<RunStatus> {
        loop {
            let t = self.state.time();
            if t == self.output_time(self.progress.frames) {
                let frame = DiagnosticsFrame::of(&self.state, self.progress.last_dt);
                self.progress.frames += 1;
                obs.frame(self, &frame)?;
            }
            if t >= self.config.t_end {
                return Ok(RunStatus::Finished);
            }
            // the first scheduled checkpoint is at k = 1
            if self.progress.checkpoints == 0 {
                self.progress.checkpoints = 1;
            }
            if t == self.checkpoint_time(self.progress.checkpoints) {
                self.progress.checkpoints += 1;
                obs.checkpoint(self)?;
                if halt_at.is_some_and(|h| t >= h) {
                    return Ok(RunStatus::Halted);
                }
            }
            let target = self
                .output_time(self.progress.frames)
                .min(self.checkpoint_time(self.progress.checkpoints))
                .min(self.config.t_end);
            let dt_cfl = cfl_dt(self.state.velocity(), self.state.omega().grid(), self.config.cfl);
            let (dt, lands) = if target - t <= dt_cfl {
                (target - t, true)
            } else {
                (dt_cfl, false)
            };
            let out = step_rk4(
                &self.state,
                dt,
                self.filter.as_ref(),
                self.track_stages,
                self.config.blowup_factor,
            )?;
            let mut next = out.state;
            if lands {
                next.set_time(target);
            }
            if let (Some(set), Some(stages)) = (self.tracers.as_mut(), out.stages.as_ref()) {
                let refs: [&dyn VelocityEval; 4] = [&stages[0], &stages[1], &stages[2], &stages[3]];
                advect_tracers(&mut set.tracers, refs, dt);
            }
            self.state = next;
            self.progress.steps += 1;
            self.progress.last_dt = dt;
            obs.step(self, out.stages.as_ref())?;
        }
    }
}

/// In-memory result of [`run`].
#[derive(Debug)]
pub struct RunRecord {
    pub frames: Vec<DiagnosticsFrame>,
    pub final_state: EulerState,
    pub steps: u64,
}

/// Builds the scenario and advances it to `t_end`, keeping every frame.
pub fn run(scenario: &VorticityScenario, config: &RunConfig) -> Result<RunRecord> {
    let comps = build_components(scenario)?;
    let state = EulerState::from_components(&comps)?;
    let mut sim = Simulation::new(state, config.clone(), None)?;
    let mut obs = Collect::default();
    sim.run(&mut obs, None)?;
    let steps = sim.progress().steps;
    Ok(RunRecord {
        frames: obs.frames,
        final_state: sim.into_parts().0,
        steps,
    })
}
