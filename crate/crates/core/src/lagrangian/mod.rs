//! Flow-map tracers with their deformation gradients, and thinning detection.

mod advect;
pub mod interp;
mod seeding;
mod thinning;
mod tracer;

pub use advect::{
    advect_tracers, interpolated_stages, AnalyticFlow, FlowSnapshot, VelocityEval, ZeroFlow,
};
pub use interp::{interp_scalar, interp_velocity};
pub use seeding::{reconstruction_tracers, seed_standard_sets, transport_residual, SeedConfig};
pub use thinning::{directional_stretch_pair, thinning_scan, ThinningEvent, ThinningScan};
pub use tracer::{Mat2, Tracer, TracerLabel, TracerSet};
