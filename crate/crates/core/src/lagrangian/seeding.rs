use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::interp::interp_scalar;
use super::tracer::{Tracer, TracerLabel, TracerSet};
use crate::initcond::{LargeScaleVortex, VorticityScenario};
use crate::spectral::ScalarField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedConfig {
    /// Radial strata of the V-cloud.
    pub shells: usize,
    /// Angular strata per shell, over the whole first quadrant.
    pub per_shell: usize,
    pub cone_points: usize,
    pub line_points: usize,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            shells: 128,
            per_shell: 512,
            cone_points: 64,
            line_points: 32,
        }
    }
}

/// Seeds the small-scale pair and diagonal line, the cone boundaries
/// `theta = 9 pi/24` and `theta = pi/5`, and a stratified-jittered cloud in
/// `V = {omega^L >= 1/2}` (first quadrant).
pub fn seed_standard_sets(sc: &VorticityScenario, cfg: &SeedConfig) -> Result<TracerSet> {
    sc.validate()?;
    let grid = sc.grid;
    let outer = 2.0 / sc.big_n.sqrt();
    if outer >= grid.half_width() {
        return Err(Error::invalid(format!(
            "seeding radius {outer} falls outside the box"
        )));
    }
    let mut out = Vec::new();

    let (h0, h1) = sc.small_segment();
    out.push(Tracer::new([h0, h0], TracerLabel::SmallScale));
    out.push(Tracer::new([h1, h1], TracerLabel::SmallScale));
    for k in 1..cfg.line_points.saturating_sub(1) {
        let h = h0 + (h1 - h0) * k as f64 / (cfg.line_points - 1) as f64;
        out.push(Tracer::new([h, h], TracerLabel::SmallScale));
    }

    let (a_lo, a_hi) = sc.annulus();
    for (theta, label) in [
        (9.0 * PI / 24.0, TracerLabel::ConePlus),
        (PI / 5.0, TracerLabel::ConeMinus),
    ] {
        for k in 0..cfg.cone_points {
            let s = if cfg.cone_points > 1 {
                k as f64 / (cfg.cone_points - 1) as f64
            } else {
                0.5
            };
            let r = a_lo * (a_hi / a_lo).powf(s);
            out.push(Tracer::new([r * theta.cos(), r * theta.sin()], label));
        }
    }

    let vortex = LargeScaleVortex::new(sc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let r_lo = 0.5 / sc.big_n;
    let dr = (outer - r_lo) / cfg.shells as f64;
    let dth = FRAC_PI_2 / cfg.per_shell as f64;
    for i in 0..cfg.shells {
        for k in 0..cfg.per_shell {
            let r = r_lo + (i as f64 + rng.gen::<f64>()) * dr;
            let th = (k as f64 + rng.gen::<f64>()) * dth;
            let x = [r * th.cos(), r * th.sin()];
            if vortex.eval(x) >= 0.5 {
                out.push(Tracer::new(x, TracerLabel::VCloud));
            }
        }
    }
    Ok(TracerSet::new(out))
}

/// Tracers on every `stride`-th grid node within `radius` of the origin,
/// used for the transport reconstruction check.
pub fn reconstruction_tracers(
    grid: crate::spectral::Grid,
    radius: f64,
    stride: usize,
) -> TracerSet {
    let n = grid.n();
    let mut out = Vec::new();
    for i1 in (0..n).step_by(stride.max(1)) {
        for i2 in (0..n).step_by(stride.max(1)) {
            let x = [grid.coord(i1), grid.coord(i2)];
            if x[0].hypot(x[1]) <= radius {
                out.push(Tracer::new(x, TracerLabel::Custom));
            }
        }
    }
    TracerSet::new(out)
}

/// Relative L2 mismatch between `omega_t(Phi(t, x0))` and `omega_0(x0)` over
/// the tracers, the discrete form of `omega(t, x) = omega_0(Phi^-1(t, x))`.
pub fn transport_residual(set: &TracerSet, omega0: &ScalarField, omega_t: &ScalarField) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for tr in set.iter() {
        let a = interp_scalar(omega0, tr.x0);
        let b = interp_scalar(omega_t, tr.x);
        num += (a - b) * (a - b);
        den += a * a;
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}
