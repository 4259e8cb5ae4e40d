use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::lagrangian::{TracerLabel, TracerSet};
use crate::{Error, Result};

/// Default angular bin width `2 pi / 512`.
pub const DEFAULT_DTHETA: f64 = std::f64::consts::PI / 256.0;

/// Shell occupancy below which a measure is flagged unreliable.
pub const MIN_OCCUPANCY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMeasureSample {
    pub r0: f64,
    /// `|I(t, r0)|` in radians.
    pub measure: f64,
    pub dtheta: f64,
    /// Cloud tracers found in the shell.
    pub occupancy: usize,
}

/// `m` radii at the midpoints of equal sub-intervals of `[lo, hi]`, so each
/// carries the same Lebesgue weight.
pub fn annulus_radii(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| lo + (i as f64 + 0.5) * (hi - lo) / m as f64)
        .collect()
}

/// Bins V-cloud tracers with `|Phi| in [r0 - dr, r0 + dr]` by first-quadrant
/// angle; the measure is `dtheta` times the number of occupied bins.
pub fn angular_measure(
    set: &TracerSet,
    radii: &[f64],
    dtheta: f64,
    dr: f64,
) -> Result<Vec<AngularMeasureSample>> {
    if !(dtheta > 0.0 && dtheta <= FRAC_PI_2 && dr > 0.0) {
        return Err(Error::invalid("dtheta and dr must be positive"));
    }
    let nbins = (FRAC_PI_2 / dtheta).ceil() as usize;
    let polar: Vec<(f64, f64)> = set
        .with_label(TracerLabel::VCloud)
        .map(|t| (t.x[0].hypot(t.x[1]), t.x[1].atan2(t.x[0])))
        .collect();
    let mut out = Vec::with_capacity(radii.len());
    for &r0 in radii {
        let mut bins = vec![false; nbins];
        let mut occupancy = 0;
        for &(r, th) in &polar {
            if (r - r0).abs() > dr || !(0.0..=FRAC_PI_2).contains(&th) {
                continue;
            }
            occupancy += 1;
            bins[((th / dtheta) as usize).min(nbins - 1)] = true;
        }
        if occupancy < MIN_OCCUPANCY {
            log::warn!("angular measure at r0 = {r0}: only {occupancy} tracers in shell");
        }
        let measure = (bins.iter().filter(|&&b| b).count() as f64 * dtheta).min(FRAC_PI_2);
        out.push(AngularMeasureSample {
            r0,
            measure,
            dtheta,
            occupancy,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// More than half of the radii carry measure at most `1/M`.
    One,
    /// At least half of the radii carry measure at least `1/M`.
    Two,
    Inconclusive,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::One => "I",
            Case::Two => "II",
            Case::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseVerdict {
    pub case: Case,
    /// Lebesgue fraction of radii with measure `<= 1/M`.
    pub fraction_low: f64,
    /// Fraction of radii whose measure is within `dtheta` of `1/M`.
    pub uncertainty: f64,
}

/// Classifies one time slice. Samples must come from [`annulus_radii`]
/// (equal weights) and number at least 32.
pub fn classify_case(samples: &[AngularMeasureSample], m: f64) -> Result<CaseVerdict> {
    if samples.len() < 32 {
        return Err(Error::invalid(format!(
            "case classification needs at least 32 radii, got {}",
            samples.len()
        )));
    }
    if !(m > 1.0) {
        return Err(Error::invalid("threshold M must exceed 1"));
    }
    let inv = 1.0 / m;
    let w = 1.0 / samples.len() as f64;
    let fraction_low = samples.iter().filter(|s| s.measure <= inv).count() as f64 * w;
    let uncertainty = samples
        .iter()
        .filter(|s| (s.measure - inv).abs() <= s.dtheta)
        .count() as f64
        * w;
    let case = if (fraction_low - 0.5).abs() <= uncertainty + 1e-12 {
        Case::Inconclusive
    } else if fraction_low > 0.5 {
        Case::One
    } else {
        Case::Two
    };
    Ok(CaseVerdict {
        case,
        fraction_low,
        uncertainty,
    })
}

/// Case over all times seen so far: Case I once any slice is Case I, Case II
/// while every slice is Case II.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTracker {
    seen_one: bool,
    all_two: Option<bool>,
}

impl CaseTracker {
    pub fn push(&mut self, v: &CaseVerdict) {
        self.seen_one |= v.case == Case::One;
        self.all_two = Some(self.all_two.unwrap_or(true) && v.case == Case::Two);
    }

    pub fn verdict(&self) -> Case {
        if self.seen_one {
            Case::One
        } else if self.all_two == Some(true) {
            Case::Two
        } else {
            Case::Inconclusive
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::Tracer;
    use std::f64::consts::PI;

    fn sample(measure: f64) -> AngularMeasureSample {
        AngularMeasureSample {
            r0: 0.2,
            measure,
            dtheta: DEFAULT_DTHETA,
            occupancy: 100,
        }
    }

    fn ring(r: f64, th: (f64, f64), k: usize) -> Vec<Tracer> {
        (0..k)
            .map(|i| {
                let t = th.0 + (th.1 - th.0) * (i as f64 + 0.5) / k as f64;
                Tracer::new([r * t.cos(), r * t.sin()], TracerLabel::VCloud)
            })
            .collect()
    }

    #[test]
    fn measure_of_an_arc() {
        let set = TracerSet::new(ring(0.2, (PI / 5.0, 9.0 * PI / 24.0), 2000));
        let s = angular_measure(&set, &[0.2], DEFAULT_DTHETA, 0.01).unwrap();
        let exact = 7.0 * PI / 40.0;
        assert!((s[0].measure - exact).abs() <= 2.0 * DEFAULT_DTHETA);
        assert!(s[0].measure <= FRAC_PI_2);
    }

    #[test]
    fn empty_shell_is_zero() {
        let set = TracerSet::new(ring(0.2, (0.1, 0.5), 50));
        let s = angular_measure(&set, &[0.5], DEFAULT_DTHETA, 0.01).unwrap();
        assert_eq!(s[0].measure, 0.0);
        assert_eq!(s[0].occupancy, 0);
    }

    #[test]
    fn refinement_changes_measure_by_at_most_a_bin() {
        let coarse = TracerSet::new(ring(0.2, (0.3, 1.1), 400));
        let fine = TracerSet::new(ring(0.2, (0.3, 1.1), 800));
        let a = angular_measure(&coarse, &[0.2], DEFAULT_DTHETA, 0.01).unwrap()[0].measure;
        let b = angular_measure(&fine, &[0.2], DEFAULT_DTHETA, 0.01).unwrap()[0].measure;
        assert!((a - b).abs() <= DEFAULT_DTHETA);
    }

    #[test]
    fn classification_rules() {
        let zeros = vec![sample(0.0); 32];
        assert_eq!(classify_case(&zeros, 2.0).unwrap().case, Case::One);
        let wide = vec![sample(7.0 * PI / 40.0); 32];
        assert_eq!(classify_case(&wide, 2.0).unwrap().case, Case::Two);
        let mut half = vec![sample(0.0); 16];
        half.extend(vec![sample(1.0); 16]);
        assert_eq!(classify_case(&half, 2.0).unwrap().case, Case::Inconclusive);
        assert!(classify_case(&zeros[..31], 2.0).is_err());
    }

    #[test]
    fn tracker_is_cumulative() {
        let two = CaseVerdict {
            case: Case::Two,
            fraction_low: 0.0,
            uncertainty: 0.0,
        };
        let one = CaseVerdict {
            case: Case::One,
            ..two
        };
        let mut t = CaseTracker::default();
        assert_eq!(t.verdict(), Case::Inconclusive);
        t.push(&two);
        assert_eq!(t.verdict(), Case::Two);
        t.push(&one);
        t.push(&two);
        assert_eq!(t.verdict(), Case::One);
    }
}
