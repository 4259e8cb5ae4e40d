//! Initial vorticity: the odd-odd large-scale sector vortex, the small-scale
//! diagonal tube, symmetry-breaking perturbations and far-field remainders.

pub mod bump;
mod builders;
pub mod scenario;

pub use builders::{
    build_components, build_large_scale, build_perturbation, build_remainder, build_small_scale,
    choose_small_scale_sign, dipole_bump, support_distance, support_radius, InitialComponents,
    LargeScaleVortex, RemainderBlob, SmallScaleTube,
};
pub use scenario::{
    ComponentLabel, PerturbationSpec, RemainderSpec, SignChoice, VorticityScenario,
};
