use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::filter::SpectralFilter;
use super::state::EulerState;
use crate::lagrangian::FlowSnapshot;
use crate::spectral::ops::{dealias_spectrum, derivative_spectrum};
use crate::spectral::{biot_savart, Grid, ScalarField, VectorField};
use crate::{Error, Result};

/// Velocity floor in the CFL formula.
pub const VELOCITY_FLOOR: f64 = 1e-8;

/// `-P(u . grad f)` with `P` the 2/3 truncation, mean mode removed.
fn advection(u: &VectorField, f: &ScalarField) -> Result<ScalarField> {
    let spec = f.spectrum();
    let d1 = derivative_spectrum(spec, 0).to_field();
    let d2 = derivative_spectrum(spec, 1).to_field();
    let n = f.grid().n();
    let mut prod = vec![0.0; f.grid().len()];
    prod.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        let o = r * n;
        let (a1, a2) = (&u.u1.samples()[o..o + n], &u.u2.samples()[o..o + n]);
        let (g1, g2) = (&d1.samples()[o..o + n], &d2.samples()[o..o + n]);
        for i in 0..n {
            row[i] = -(a1[i] * g1[i] + a2[i] * g2[i]);
        }
    });
    let prod = ScalarField::from_samples(f.grid(), prod)
        .map_err(|_| Error::NonFinite("advection term"))?;
    let mut out = dealias_spectrum(prod.spectrum());
    out.coeffs_mut()[0] = Complex64::default();
    Ok(out.to_field())
}

/// Right-hand side `-P(u . grad omega)` with `u = biot_savart(omega)`.
pub fn rhs(omega: &ScalarField) -> Result<ScalarField> {
    let u = biot_savart(omega)?;
    advection(&u, omega)
}

/// `dt = cfl dx / max(sup|u1|, sup|u2|, floor)`.
pub fn cfl_dt(u: &VectorField, grid: Grid, cfl: f64) -> f64 {
    let speed = u.u1.sup().max(u.u2.sup()).max(VELOCITY_FLOOR);
    cfl * grid.dx() / speed
}

/// `base + sum c_i f_i`, evaluated per sample in a fixed order.
fn combine(base: &ScalarField, terms: &[(f64, &ScalarField)]) -> Result<ScalarField> {
    let n = base.grid().n();
    let mut out = base.samples().to_vec();
    out.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        let o = r * n;
        for (c, f) in terms {
            let s = &f.samples()[o..o + n];
            for i in 0..n {
                row[i] += c * s[i];
            }
        }
    });
    ScalarField::from_samples(base.grid(), out).map_err(|_| Error::NonFinite("rk4 step"))
}

pub struct StepOutput {
    pub state: EulerState,
    /// Velocities at the four RK4 stages, when requested.
    pub stages: Option<[FlowSnapshot; 4]>,
    /// `sup|omega(t + dt)| / sup|omega(t)|`.
    pub growth: f64,
}

/// Classical RK4 step of the total vorticity and every label, all advected
/// by the stage velocity of the total. Signals blow-up when `sup|omega|`
/// grows by more than `blowup_factor` in one step.
pub fn step_rk4(
    state: &EulerState,
    dt: f64,
    filter: &dyn SpectralFilter,
    want_stages: bool,
    blowup_factor: f64,
) -> Result<StepOutput> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    rk4_signed(state, dt, filter, want_stages, blowup_factor)
}

/// Same as [`step_rk4`] but accepts negative `dt` (time reversal).
pub(crate) fn rk4_signed(
    state: &EulerState,
    dt: f64,
    filter: &dyn SpectralFilter,
    want_stages: bool,
    blowup_factor: f64,
) -> Result<StepOutput> {
    let w0 = state.omega();
    let l0: Vec<&ScalarField> = state.labels().iter().map(|(_, f)| f).collect();
    let mut snaps = Vec::new();

    let eval = |w: &ScalarField, u: &VectorField, ls: &[&ScalarField]| -> Result<_> {
        let kw = advection(u, w)?;
        let kl = ls.iter().map(|f| advection(u, f)).collect::<Result<Vec<_>>>()?;
        Ok((kw, kl))
    };

    let u1 = state.velocity().clone();
    if want_stages {
        snaps.push(FlowSnapshot::new(&u1));
    }
    let (k1, kl1) = eval(w0, &u1, &l0)?;

    let stage = |c: f64, kw: &ScalarField, kl: &[ScalarField]| -> Result<(ScalarField, Vec<ScalarField>)> {
        let w = combine(w0, &[(c, kw)])?;
        let ls = l0
            .iter()
            .zip(kl)
            .map(|(f, k)| combine(f, &[(c, k)]))
            .collect::<Result<Vec<_>>>()?;
        Ok((w, ls))
    };

    let (w2, ls2) = stage(0.5 * dt, &k1, &kl1)?;
    let u2 = biot_savart(&w2)?;
    if want_stages {
        snaps.push(FlowSnapshot::new(&u2));
    }
    let (k2, kl2) = eval(&w2, &u2, &ls2.iter().collect::<Vec<_>>())?;

    let (w3, ls3) = stage(0.5 * dt, &k2, &kl2)?;
    let u3 = biot_savart(&w3)?;
    if want_stages {
        snaps.push(FlowSnapshot::new(&u3));
    }
    let (k3, kl3) = eval(&w3, &u3, &ls3.iter().collect::<Vec<_>>())?;

    let (w4, ls4) = stage(dt, &k3, &kl3)?;
    let u4 = biot_savart(&w4)?;
    if want_stages {
        snaps.push(FlowSnapshot::new(&u4));
    }
    let (k4, kl4) = eval(&w4, &u4, &ls4.iter().collect::<Vec<_>>())?;

    let h = dt / 6.0;
    let finish = |f: &ScalarField, a: &ScalarField, b: &ScalarField, c: &ScalarField, d: &ScalarField| {
        combine(f, &[(h, a), (2.0 * h, b), (2.0 * h, c), (h, d)]).map(|r| filter.apply(&r))
    };
    let w_next = finish(w0, &k1, &k2, &k3, &k4)?;
    let mut labels = Vec::with_capacity(l0.len());
    for (i, (lab, f)) in state.labels().iter().enumerate() {
        labels.push((*lab, finish(f, &kl1[i], &kl2[i], &kl3[i], &kl4[i])?));
    }

    let before = w0.sup();
    let after = w_next.sup();
    let growth = if before > 0.0 { after / before } else { 1.0 };
    let t_next = state.time() + dt;
    if growth > blowup_factor {
        return Err(Error::BlowUp {
            time: t_next,
            growth,
        });
    }
    let state = EulerState::with_labels(t_next, w_next, labels)?;
    let stages = if want_stages {
        let mut it = snaps.into_iter();
        Some([
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        ])
    } else {
        None
    };
    Ok(StepOutput {
        state,
        stages,
        growth,
    })
}
