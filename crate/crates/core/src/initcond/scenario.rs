use serde::{Deserialize, Serialize};

use crate::spectral::Grid;
use crate::{Error, Result};

/// Which part of the initial vorticity a transported field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentLabel {
    Large,
    Small,
    Perturbation,
    Remainder,
    Total,
}

impl ComponentLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentLabel::Large => "large",
            ComponentLabel::Small => "small",
            ComponentLabel::Perturbation => "perturbation",
            ComponentLabel::Remainder => "remainder",
            ComponentLabel::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "large" => ComponentLabel::Large,
            "small" => ComponentLabel::Small,
            "perturbation" => ComponentLabel::Perturbation,
            "remainder" => ComponentLabel::Remainder,
            "total" => ComponentLabel::Total,
            _ => return None,
        })
    }
}

/// Sign applied to the small-scale vortex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignChoice {
    /// Pick the sign making `integral u_L . u_S >= 0`.
    Auto,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    /// Target `||v_0||_{H^s}`; zero disables the perturbation.
    pub eps: f64,
    pub s: f64,
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            eps: 0.0,
            s: 3.0,
            center: [0.35, -0.2],
            radius: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemainderSpec {
    /// Required gap between the supports of the main vorticity and the
    /// remainder; zero disables the remainder.
    pub distance: f64,
    /// Exponent of the `L^p` part of the norm budget (`p > 2`).
    pub p: f64,
    /// Bound on `||g||_{L1} + ||g||_{Lp}`.
    pub budget: f64,
    pub radius: f64,
    /// Direction (radians) from the origin along which the blob is placed.
    pub direction: f64,
}

impl Default for RemainderSpec {
    fn default() -> Self {
        Self {
            distance: 0.0,
            p: 4.0,
            budget: 0.5,
            radius: 0.2,
            direction: std::f64::consts::FRAC_PI_4,
        }
    }
}

/// Complete description of an initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VorticityScenario {
    /// Large-scale parameter `N`.
    pub big_n: f64,
    /// Small-scale parameter `n > N`.
    pub n_small: f64,
    pub k_exp: f64,
    pub tau_star: f64,
    /// Thinning threshold `M > 1`.
    pub m_threshold: f64,
    pub large_amplitude: f64,
    pub small_amplitude: f64,
    pub small_sign: SignChoice,
    pub perturbation: PerturbationSpec,
    pub remainder: RemainderSpec,
    pub grid: Grid,
    pub seed: u64,
}

impl Default for VorticityScenario {
    /// Desk-scale defaults: `N = 8`, `n = 64`, `K = 1`, `tau* = 1` on a
    /// `1024^2` grid over `[-pi, pi)^2`.
    fn default() -> Self {
        Self {
            big_n: 8.0,
            n_small: 64.0,
            k_exp: 1.0,
            tau_star: 1.0,
            m_threshold: 2.0,
            large_amplitude: 1.0,
            small_amplitude: 1.0,
            small_sign: SignChoice::Auto,
            perturbation: PerturbationSpec::default(),
            remainder: RemainderSpec::default(),
            grid: Grid::new(1024, std::f64::consts::PI).expect("valid default grid"),
            seed: 7,
        }
    }
}

impl VorticityScenario {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.big_n.is_finite() && self.big_n >= 4.0) {
            return Err(Error::invalid(format!("N must be >= 4, got {}", self.big_n)));
        }
        if !(self.n_small.is_finite() && self.n_small > self.big_n) {
            return Err(Error::invalid(format!(
                "n_small must exceed N, got n = {} and N = {}",
                self.n_small, self.big_n
            )));
        }
        if !positive(self.k_exp) || !positive(self.tau_star) {
            return Err(Error::invalid("K and tau_star must be positive"));
        }
        if !(self.m_threshold.is_finite() && self.m_threshold > 1.0) {
            return Err(Error::invalid("M_threshold must exceed 1"));
        }
        for (name, a) in [
            ("large amplitude", self.large_amplitude),
            ("small amplitude", self.small_amplitude),
        ] {
            if !(a.is_finite() && (0.0..=1.0).contains(&a)) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {a}")));
            }
        }
        if !(self.perturbation.eps.is_finite() && self.perturbation.eps >= 0.0) {
            return Err(Error::invalid("perturbation.eps must be non-negative"));
        }
        if !(self.remainder.distance.is_finite() && self.remainder.distance >= 0.0) {
            return Err(Error::invalid("remainder.distance must be non-negative"));
        }
        Ok(())
    }

    /// `(log N)^{K tau*}`.
    pub fn log_factor(&self) -> f64 {
        self.big_n.ln().powf(self.k_exp * self.tau_star)
    }

    /// Endpoints `h` of the diagonal segment `{(h, h)}` carried by the
    /// small-scale vortex.
    pub fn small_segment(&self) -> (f64, f64) {
        (1.0 / self.n_small, self.log_factor() / self.n_small)
    }

    /// Radial band `[N^{-5/6}, N^{-4/6}]` on which the angular measure is taken.
    pub fn annulus(&self) -> (f64, f64) {
        (self.big_n.powf(-5.0 / 6.0), self.big_n.powf(-4.0 / 6.0))
    }

    /// Time horizon `tau* log log N / log N`.
    pub fn horizon(&self) -> f64 {
        self.tau_star * self.big_n.ln().ln() / self.big_n.ln()
    }

    /// Radius of the disk `D` in the large-scale thinning case for a given
    /// `alpha`.
    pub fn thinning_disk_radius(&self, alpha: f64) -> f64 {
        alpha * self.big_n.powf(-0.5) * self.horizon()
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let sc = VorticityScenario::default();
        sc.validate().unwrap();
        let (a, b) = sc.annulus();
        assert!((a - 8f64.powf(-5.0 / 6.0)).abs() < 1e-15);
        assert!((b - 0.25).abs() < 1e-12);
        let (h0, h1) = sc.small_segment();
        assert_eq!(h0, 1.0 / 64.0);
        assert!((h1 - 8f64.ln() / 64.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let base = VorticityScenario::default();
        let cases: Vec<Box<dyn Fn(&mut VorticityScenario)>> = vec![
            Box::new(|s| s.big_n = 3.0),
            Box::new(|s| s.n_small = 8.0),
            Box::new(|s| s.k_exp = 0.0),
            Box::new(|s| s.tau_star = -1.0),
            Box::new(|s| s.m_threshold = 1.0),
            Box::new(|s| s.large_amplitude = 1.5),
            Box::new(|s| s.perturbation.eps = -1.0),
        ];
        for mutate in cases {
            let mut sc = base.clone();
            mutate(&mut sc);
            assert!(sc.validate().is_err());
        }
    }

    #[test]
    fn labels_round_trip() {
        for l in [
            ComponentLabel::Large,
            ComponentLabel::Small,
            ComponentLabel::Perturbation,
            ComponentLabel::Remainder,
            ComponentLabel::Total,
        ] {
            assert_eq!(ComponentLabel::parse(l.as_str()), Some(l));
        }
    }
}
