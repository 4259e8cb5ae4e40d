//! Free-space Biot-Savart velocity for compactly supported vorticity.
//!
//! The box is embedded in a torus four times wider and the stream function is
//! obtained by convolving with the Green's function `ln|x| / 2 pi` truncated
//! at the box diameter `R`. The truncated kernel's Fourier transform is known
//! in closed form,
//!
//! ```text
//! G_R(k) = R ln R J1(kR) / k + (J0(kR) - 1) / k^2,   G_R(0) = R^2 ln R / 2 - R^2 / 4,
//! ```
//!
//! and the padded period exceeds `2L + R` and `2R`, so the periodic
//! convolution reproduces the free-space one on the original box with no
//! image contamination. Accuracy is spectral in the vorticity resolution.

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use super::ops::biot_savart_spectrum;
use crate::{Error, Result};

const PAD: usize = 4;

fn truncated_green(k: f64, r: f64) -> f64 {
    if k == 0.0 {
        0.5 * r * r * r.ln() - 0.25 * r * r
    } else {
        let kr = k * r;
        r * r.ln() * libm::j1(kr) / k + (libm::j0(kr) - 1.0) / (k * k)
    }
}

/// Velocity induced on the box by `omega` as if it lived on the whole plane.
///
/// `omega` must vanish on the box boundary rows/columns (compact support
/// inside the box); the mean need not be zero.
pub fn free_space_biot_savart(omega: &ScalarField) -> Result<VectorField> {
    let grid = omega.grid();
    let n = grid.n();
    let edge = (0..n)
        .flat_map(|i| [omega.at(0, i), omega.at(i, 0)])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if edge > 1e-12 * omega.sup().max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(
            "free-space Biot-Savart needs vorticity supported strictly inside the box",
        ));
    }

    let big = Grid::new(PAD * n, PAD as f64 * grid.half_width())?;
    let offset = (PAD - 1) * n / 2;
    let mut padded = vec![0.0; big.len()];
    for i1 in 0..n {
        let dst = big.index(i1 + offset, offset);
        padded[dst..dst + n].copy_from_slice(&omega.samples()[i1 * n..(i1 + 1) * n]);
    }
    let padded = ScalarField::from_samples(big, padded)?;

    let radius = 2.0 * std::f64::consts::SQRT_2 * grid.half_width();
    // omega_hat = -|k|^2 psi_hat, so psi_hat = G_R omega_hat and the
    // Biot-Savart multiplier (which divides by -|k|^2 implicitly) is applied
    // to -|k|^2 G_R omega_hat.
    let scaled = padded.spectrum().map_modes(|k1, k2, c| {
        let kk = k1 * k1 + k2 * k2;
        let g = truncated_green(kk.sqrt(), radius);
        c * Complex64::new(-kk * g, 0.0)
    });
    let (u1, u2) = biot_savart_spectrum(&scaled);
    let (u1, u2) = (u1.to_field(), u2.to_field());

    let crop = |f: &ScalarField| {
        let mut out = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let src = big.index(i1 + offset, offset);
            out.extend_from_slice(&f.samples()[src..src + n]);
        }
        ScalarField::from_samples(grid, out)
    };
    VectorField::new(crop(&u1)?, crop(&u2)?)
}
