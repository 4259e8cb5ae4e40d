use serde::Serialize;

use super::tracer::{Tracer, TracerLabel, TracerSet};
use crate::{Error, Result};

/// A tracer and direction where `T^T J T >= M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThinningEvent {
    pub t: f64,
    pub label: TracerLabel,
    pub x0: [f64; 2],
    pub direction: [f64; 2],
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ThinningScan {
    pub events: Vec<ThinningEvent>,
    /// Running maximum of `T^T J T` over the scanned tracers.
    pub max: f64,
}

fn check_unit(t: [f64; 2]) -> Result<()> {
    let norm = t[0].hypot(t[1]);
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(Error::invalid(format!("direction {t:?} is not a unit vector")));
    }
    Ok(())
}

pub fn thinning_scan(set: &TracerSet, time: f64, direction: [f64; 2], m: f64) -> Result<ThinningScan> {
    check_unit(direction)?;
    let mut out = ThinningScan {
        events: Vec::new(),
        max: f64::NEG_INFINITY,
    };
    for tr in set.iter() {
        let value = tr.stretch(direction);
        out.max = out.max.max(value);
        if value >= m {
            out.events.push(ThinningEvent {
                t: time,
                label: tr.label,
                x0: tr.x0,
                direction,
                value,
                threshold: m,
            });
        }
    }
    Ok(out)
}

/// Mean-value surrogate `((Phi_b - Phi_a) . T) / ((b0 - a0) . T)`.
pub fn directional_stretch_pair(a: &Tracer, b: &Tracer, direction: [f64; 2]) -> Result<f64> {
    check_unit(direction)?;
    let dot = |p: [f64; 2], q: [f64; 2]| (q[0] - p[0]) * direction[0] + (q[1] - p[1]) * direction[1];
    let base = dot(a.x0, b.x0);
    let scale = (b.x0[0] - a.x0[0]).hypot(b.x0[1] - a.x0[1]);
    if !(base.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Err(Error::invalid("tracer pair is degenerate along the direction"));
    }
    Ok(dot(a.x, b.x) / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{advect_tracers, AnalyticFlow};

    fn strain() -> AnalyticFlow<impl Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) + Sync> {
        AnalyticFlow(|x: [f64; 2]| ([x[0], -x[1]], [[1.0, 0.0], [0.0, -1.0]]))
    }

    #[test]
    fn identity_gives_no_events() {
        let set = TracerSet::new(vec![Tracer::new([0.1, 0.1], TracerLabel::Custom); 3]);
        let s = thinning_scan(&set, 0.0, [0.6, 0.8], 1.01).unwrap();
        assert!(s.events.is_empty());
        assert!((s.max - 1.0).abs() < 1e-15);
        assert!(thinning_scan(&set, 0.0, [1.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn strain_fires_at_log_m() {
        let flow = strain();
        let m = 2.0f64;
        let dt = 1e-3;
        let mut set = TracerSet::new(vec![Tracer::new([0.1, 0.3], TracerLabel::Custom)]);
        let mut t = 0.0;
        let mut first = None;
        for k in 1..=1000 {
            advect_tracers(&mut set.tracers, [&flow, &flow, &flow, &flow], dt);
            t = k as f64 * dt;
            let s = thinning_scan(&set, t, [1.0, 0.0], m).unwrap();
            if first.is_none() && !s.events.is_empty() {
                first = Some(t);
            }
            // orthogonal direction is compressed by exactly the inverse factor
            let tr = &set.tracers[0];
            let along = tr.stretch([1.0, 0.0]);
            let across = tr.stretch([0.0, 1.0]);
            assert!((along * across / tr.det() - 1.0).abs() < 1e-9);
        }
        let first = first.unwrap();
        assert!(first >= m.ln() - 1e-12 && first <= m.ln() + dt, "{first} at t {t}");
    }

    #[test]
    fn rotation_never_fires() {
        let flow = AnalyticFlow(|x: [f64; 2]| ([-x[1], x[0]], [[0.0, -1.0], [1.0, 0.0]]));
        let mut set = TracerSet::new(vec![Tracer::new([0.4, 0.0], TracerLabel::Custom)]);
        for k in 1..=300 {
            advect_tracers(&mut set.tracers, [&flow, &flow, &flow, &flow], 0.01);
            let s = thinning_scan(&set, k as f64 * 0.01, [1.0, 0.0], 1.0 + 1e-6).unwrap();
            assert!(s.events.is_empty());
            assert!((s.max - (k as f64 * 0.01).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn pair_surrogate() {
        let a = Tracer::new([0.1, 0.0], TracerLabel::Custom);
        let b = Tracer::new([0.2, 0.0], TracerLabel::Custom);
        assert_eq!(directional_stretch_pair(&a, &b, [1.0, 0.0]).unwrap(), 1.0);
        assert!(directional_stretch_pair(&a, &b, [0.0, 1.0]).is_err());

        let flow = strain();
        let mut set = vec![a, b];
        for _ in 0..100 {
            advect_tracers(&mut set, [&flow, &flow, &flow, &flow], 0.01);
        }
        let v = directional_stretch_pair(&set[0], &set[1], [1.0, 0.0]).unwrap();
        assert!((v - 1f64.exp()).abs() < 1e-6);
    }
}
