//! Pseudospectral RK4 integration of the vorticity equation with labelled,
//! co-transported components.

mod filter;
mod run;
mod state;
mod stepper;

pub use filter::{filter_registry, ExponentialFilter, FilterConfig, NoFilter, SpectralFilter};
pub use run::{
    run, Collect, DiagnosticsFrame, Progress, RunConfig, RunObserver, RunRecord, RunStatus,
    Simulation,
};
pub use state::{project, EulerState};
pub use stepper::{cfl_dt, rhs, step_rk4, StepOutput, VELOCITY_FLOOR};
