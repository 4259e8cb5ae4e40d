//! Pseudospectral solver for the inviscid 2D vorticity equation on a periodic
//! box, with Lagrangian flow-map tracking and diagnostics for vortex thinning
//! and small-to-large-scale energy transfer.
//!
//! Layout:
//! - [`spectral`]: grid, transforms, Biot-Savart, filters and norms
//! - [`initcond`]: initial vorticity builders and scenario description
//! - [`evolution`]: RK4 time stepping and run driver
//! - [`lagrangian`]: tracers, deformation gradient and thinning detection
//! - [`diagnostics`]: angular measure, Zlatos decomposition, energy transfer, probes
//! - [`runner`]: config files, run directories, manifests and the study registry

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod initcond;
pub mod lagrangian;
pub mod registry;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};
