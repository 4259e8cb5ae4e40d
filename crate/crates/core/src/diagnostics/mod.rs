//! Measurements on snapshots and tracer sets: angular measure and the case
//! dichotomy, the Zlatos decomposition, scale-split energies, the transfer
//! inequality, prescribed thinning, and the perturbation and gluing probes.

mod angular;
mod energy;
pub mod output;
mod probes;
mod zlatos;

pub use angular::{
    angular_measure, annulus_radii, classify_case, AngularMeasureSample, Case, CaseTracker,
    CaseVerdict, DEFAULT_DTHETA,
};
pub use energy::{
    energy_transfer_check, prescribed_thinning_energy, scale_energy_split, PrescribedRow,
    ScaleEnergySplit, TransferRow,
};
pub use probes::{
    labelled_support_gap, perturbation_stability_probe, remainder_gluing_probe, GluingRow,
    ProbeConfig, StabilityFrame, StabilityRow, SUPPORT_FRACTION,
};
pub use zlatos::{
    diagonal_sweep, fit_constant, kernel_registry, zlatos_q, zlatos_residual, ZlatosKernel,
    ZlatosResidual, SWEEP_STEPS,
};
