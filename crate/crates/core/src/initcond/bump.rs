//! C-infinity plateau profiles built from the `exp(-1/s)` ramp.

use std::f64::consts::PI;

use crate::{Error, Result};

fn flat(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth monotone step: 0 for `s <= 0`, 1 for `s >= 1`, exactly 1/2 at 1/2.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = flat(s);
        a / (a + flat(1.0 - s))
    }
}

/// Profile equal to `value` on `[a, b]`, zero outside `(c, d)`, monotone in
/// between. Each transition may place its half-height point anywhere inside
/// the ramp; the ramp stays C-infinity because `s -> s^p` only reshapes the
/// flat ends of `exp(-1/s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub plateau: (f64, f64),
    pub support: (f64, f64),
    pub value: f64,
    pub rise_half: Option<f64>,
    pub fall_half: Option<f64>,
}

impl BumpSpec {
    pub fn new(plateau: (f64, f64), support: (f64, f64), value: f64) -> Self {
        Self {
            plateau,
            support,
            value,
            rise_half: None,
            fall_half: None,
        }
    }

    pub fn with_half_points(mut self, rise: f64, fall: f64) -> Self {
        self.rise_half = Some(rise);
        self.fall_half = Some(fall);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    spec: BumpSpec,
    rise_exp: f64,
    fall_exp: f64,
}

fn half_exponent(start: f64, end: f64, half: Option<f64>) -> Result<f64> {
    match half {
        None => Ok(1.0),
        Some(h) if h > start && h < end => {
            let frac = (h - start) / (end - start);
            Ok(0.5f64.ln() / frac.ln())
        }
        Some(h) => Err(Error::invalid(format!(
            "half-height point {h} outside ramp ({start}, {end})"
        ))),
    }
}

pub fn build_bump(spec: BumpSpec) -> Result<BumpProfile> {
    let (a, b) = spec.plateau;
    let (c, d) = spec.support;
    if !(c < a && a <= b && b < d) {
        return Err(Error::invalid(format!(
            "bump intervals must satisfy c < a <= b < d, got plateau [{a}, {b}] support [{c}, {d}]"
        )));
    }
    let rise_exp = half_exponent(c, a, spec.rise_half)?;
    // The falling ramp runs from d back to b.
    let fall_exp = half_exponent(-d, -b, spec.fall_half.map(|h| -h))?;
    Ok(BumpProfile {
        spec,
        rise_exp,
        fall_exp,
    })
}

impl BumpProfile {
    pub fn spec(&self) -> &BumpSpec {
        &self.spec
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.spec.plateau;
        let (c, d) = self.spec.support;
        let shape = if x <= c || x >= d {
            0.0
        } else if x < a {
            smooth_step(((x - c) / (a - c)).powf(self.rise_exp))
        } else if x <= b {
            1.0
        } else {
            smooth_step(((d - x) / (d - b)).powf(self.fall_exp))
        };
        self.spec.value * shape
    }
}

/// Radial profile: 1 on `[1/N, N^-1/2]`, 0 outside `[1/(2N), 2 N^-1/2]`.
pub fn radial_profile(big_n: f64) -> Result<BumpProfile> {
    let s = big_n.sqrt();
    build_bump(BumpSpec::new((1.0 / big_n, 1.0 / s), (0.5 / big_n, 2.0 / s), 1.0))
}

/// Angular profile: 1 on `[pi/4, pi/3]`, at least 1/2 exactly on
/// `[pi/5, 9 pi/24]`, 0 outside `[pi/6, 5 pi/12]`.
pub fn angular_profile() -> BumpProfile {
    build_bump(
        BumpSpec::new((PI / 4.0, PI / 3.0), (PI / 6.0, 5.0 * PI / 12.0), 1.0)
            .with_half_points(PI / 5.0, 9.0 * PI / 24.0),
    )
    .expect("angular profile intervals are ordered")
}
