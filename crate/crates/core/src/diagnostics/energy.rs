use serde::Serialize;

use crate::spectral::ops::is_nyquist;
use crate::spectral::{velocity_inner, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleEnergySplit {
    /// `||u^L||^2`.
    pub energy_l: f64,
    /// `||u^S||^2`.
    pub energy_s: f64,
    /// `integral u^L . u^S`.
    pub cross: f64,
}

impl ScaleEnergySplit {
    /// `||u^L + u^S||^2` by bilinearity.
    pub fn total(&self) -> f64 {
        self.energy_l + 2.0 * self.cross + self.energy_s
    }
}

pub fn scale_energy_split(omega_l: &ScalarField, omega_s: &ScalarField) -> ScaleEnergySplit {
    ScaleEnergySplit {
        energy_l: velocity_inner(omega_l, omega_l),
        energy_s: velocity_inner(omega_s, omega_s),
        cross: velocity_inner(omega_l, omega_s),
    }
}

/// One row of `transfer.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferRow {
    pub t: f64,
    pub energy_l: f64,
    pub energy_s: f64,
    pub cross: f64,
    /// `(||u_0^L||^2 + ||u_0^S||^2)^{1/2} - ||u^S(t)||`.
    pub lhs: f64,
    /// `||u^L(t)||`.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `lhs <= rhs + 1e-8 + 1e-6 scale` with `scale` the initial
/// `(||u_0^L||^2 + ||u_0^S||^2)^{1/2}`.
pub fn energy_transfer_check(t: f64, initial: &ScaleEnergySplit, now: &ScaleEnergySplit) -> TransferRow {
    let scale = (initial.energy_l + initial.energy_s).sqrt();
    let lhs = scale - now.energy_s.sqrt();
    let rhs = now.energy_l.sqrt();
    TransferRow {
        t,
        energy_l: now.energy_l,
        energy_s: now.energy_s,
        cross: now.cross,
        lhs,
        rhs,
        pass: lhs - rhs <= 1e-8 + 1e-6 * scale,
    }
}

/// One row of `prescribed.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrescribedRow {
    pub m: f64,
    pub t: f64,
    /// `||u^S(t)||^2` for `omega^S(x, t) = omega_0^S(M t x1, x2 / (M t))`.
    pub energy: f64,
    /// `(M t)^-2 ||Omega_0||^2` with `d1 Omega_0 = omega_0^S`.
    pub bound: f64,
    pub pass: bool,
}

/// Energy of the affinely squeezed small-scale vortex, evaluated exactly by
/// Plancherel on the spectrum of `omega0_s`.
pub fn prescribed_thinning_energy(omega0_s: &ScalarField, m: f64, t: f64) -> Result<PrescribedRow> {
    let a = m * t;
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::invalid(format!("M t must be at least 1, got {a}")));
    }
    let grid = omega0_s.grid();
    let spec = omega0_s.spectrum();
    let scale = spec.coeffs().iter().fold(0.0f64, |s, c| s.max(c.norm())).max(1.0);
    for j2 in 0..spec.rows() {
        if spec.get(0, j2).norm() > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "vorticity has a k1 = 0 mode at row {j2}; it has no x1-antiderivative"
            )));
        }
    }
    let energy = spec.weighted_power(|k1, k2| {
        if k1 == 0.0 || is_nyquist(grid, k1, k2) {
            0.0
        } else {
            let p = a * k1;
            let q = k2 / a;
            1.0 / (p * p + q * q)
        }
    });
    let big_omega = spec.weighted_power(|k1, k2| {
        if k1 == 0.0 || is_nyquist(grid, k1, k2) {
            0.0
        } else {
            1.0 / (k1 * k1)
        }
    });
    let bound = big_omega / (a * a);
    Ok(PrescribedRow {
        m,
        t,
        energy,
        bound,
        pass: energy <= bound * (1.0 + 1e-12),
    })
}
