use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use crate::initcond::{ComponentLabel, InitialComponents};
use crate::spectral::ops::dealias_spectrum;
use crate::spectral::{biot_savart, ScalarField, VectorField};
use crate::{Error, Result};

/// Total vorticity plus any passively co-transported labelled parts.
#[derive(Debug, Clone)]
pub struct EulerState {
    t: f64,
    omega: ScalarField,
    labels: Vec<(ComponentLabel, ScalarField)>,
    velocity: OnceLock<VectorField>,
}

/// Dealiased, exactly mean-zero projection used for initial data.
pub fn project(f: &ScalarField) -> ScalarField {
    let mut spec = dealias_spectrum(f.spectrum());
    spec.coeffs_mut()[0] = Complex64::default();
    spec.to_field()
}

impl EulerState {
    pub fn new(t: f64, omega: ScalarField) -> Result<Self> {
        Self::with_labels(t, omega, Vec::new())
    }

    pub fn with_labels(
        t: f64,
        omega: ScalarField,
        labels: Vec<(ComponentLabel, ScalarField)>,
    ) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::invalid("state time must be finite"));
        }
        if labels.iter().any(|(_, f)| f.grid() != omega.grid()) {
            return Err(Error::invalid("labelled components on a different grid"));
        }
        let scale = omega.sup().max(f64::MIN_POSITIVE);
        if omega.mean().abs() > 1e-10 * scale {
            return Err(Error::invalid(format!(
                "vorticity mean {} is not zero",
                omega.mean()
            )));
        }
        Ok(Self {
            t,
            omega,
            labels,
            velocity: OnceLock::new(),
        })
    }

    /// Projects each component onto the dealiased, mean-zero space and sums
    /// them into the total.
    pub fn from_components(c: &InitialComponents) -> Result<Self> {
        let mut labels = vec![
            (ComponentLabel::Large, project(&c.large)),
            (ComponentLabel::Small, project(&c.small)),
        ];
        if c.perturbation.sup() > 0.0 {
            labels.push((ComponentLabel::Perturbation, project(&c.perturbation)));
        }
        if let Some((g, _)) = &c.remainder {
            labels.push((ComponentLabel::Remainder, project(g)));
        }
        let mut total = labels[0].1.clone();
        for (_, f) in &labels[1..] {
            total = total.add(f);
        }
        Self::with_labels(0.0, total, labels)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn omega(&self) -> &ScalarField {
        &self.omega
    }

    pub fn labels(&self) -> &[(ComponentLabel, ScalarField)] {
        &self.labels
    }

    pub fn label(&self, l: ComponentLabel) -> Option<&ScalarField> {
        self.labels.iter().find(|(k, _)| *k == l).map(|(_, f)| f)
    }

    /// `biot_savart(omega)`, computed once per state.
    pub fn velocity(&self) -> &VectorField {
        self.velocity.get_or_init(|| {
            biot_savart(&self.omega).expect("state vorticity is mean-zero by construction")
        })
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn velocity_cache_is_coherent() {
        let g = Grid::new(32, PI).unwrap();
        let w = ScalarField::from_fn(g, |x| 2.0 * x[0].sin() * x[1].sin());
        let s = EulerState::new(0.0, w.clone()).unwrap();
        let u = biot_savart(&w).unwrap();
        assert_eq!(s.velocity().u1.samples(), u.u1.samples());
        assert_eq!(s.velocity().u2.samples(), u.u2.samples());
    }

    #[test]
    fn rejects_nonzero_mean() {
        let g = Grid::new(32, PI).unwrap();
        let w = ScalarField::from_fn(g, |x| 1.0 + x[0].sin());
        assert!(EulerState::new(0.0, w).is_err());
    }

    #[test]
    fn projection_is_mean_free_and_dealiased() {
        let g = Grid::new(32, PI).unwrap();
        let w = ScalarField::from_fn(g, |x| 0.3 + (15.0 * x[0]).cos() + x[1].sin());
        let p = project(&w);
        assert!(p.mean().abs() < 1e-15);
        let expect = ScalarField::from_fn(g, |x| x[1].sin());
        assert!(p.sub(&expect).sup() < 1e-13);
    }
}
