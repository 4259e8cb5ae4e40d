//! Uniform periodic grid, spectral transforms and the field operators built
//! on them.

mod fft;
pub mod field;
pub mod free_space;
pub mod grid;
pub mod ops;
pub mod snapshot;

pub use field::{ScalarField, Spectrum, VectorField};
pub use grid::Grid;
pub use ops::{
    biot_savart, coarse_grain, dealias, divergence, gradient, norms, sobolev_norm,
    strain_tensor, velocity_gradient, velocity_inner, velocity_sobolev_norm, Norms, StrainTensor,
};
