//! Study configuration file.
//!
//! TOML with dotted keys, e.g.
//!
//! ```toml
//! N = 8
//! n_small = 64
//! grid.n = 1024
//! grid.L = 3.141592653589793
//! perturbation.eps = 1e-3
//! run.t_end = 0.5
//! run.filter.kind = "exponential"
//! study.eps_list = [1e-4, 1e-3, 1e-2]
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{ProbeConfig, DEFAULT_DTHETA};
use crate::evolution::RunConfig;
use crate::initcond::{PerturbationSpec, RemainderSpec, SignChoice, VorticityScenario};
use crate::lagrangian::SeedConfig;
use crate::spectral::Grid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 1024, half_width: PI }
    }
}

/// Parameters used by individual study modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyParams {
    /// Perturbation sizes for `stability`.
    pub eps_list: Vec<f64>,
    /// Remainder distances for `gluing`; defaults to `{0.5, 1, 2} L / 4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    /// `M` values for `prescribed`.
    pub m_grid: Vec<f64>,
    /// Time at which the prescribed thinning is evaluated.
    pub prescribed_t: f64,
    /// Zlatos kernels evaluated by `zlatos`, the first being the primary one.
    pub kernels: Vec<String>,
    /// Vorticity snapshot analysed by `zlatos` instead of the initial data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    /// Number of radii sampled in the annulus.
    pub radii: usize,
    pub dtheta: f64,
    /// Stretch direction `T` for thinning detection and probes.
    pub direction: [f64; 2],
}

impl Default for StudyParams {
    fn default() -> Self {
        Self {
            eps_list: vec![1e-4, 1e-3, 1e-2],
            distances: None,
            m_grid: (0..=10).map(|k| f64::from(1u32 << k)).collect(),
            prescribed_t: 1.0,
            kernels: vec!["quartic".into(), "quadratic".into()],
            snapshot: None,
            radii: 64,
            dtheta: DEFAULT_DTHETA,
            direction: [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    #[serde(rename = "N")]
    pub big_n: f64,
    pub n_small: f64,
    #[serde(rename = "K")]
    pub k_exp: f64,
    pub tau_star: f64,
    #[serde(rename = "M_threshold")]
    pub m_threshold: f64,
    pub large_amplitude: f64,
    pub small_amplitude: f64,
    pub small_sign: SignChoice,
    pub seed: u64,
    pub grid: GridSpec,
    pub perturbation: PerturbationSpec,
    pub remainder: RemainderSpec,
    pub run: RunConfig,
    pub tracers: SeedConfig,
    pub study: StudyParams,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let sc = VorticityScenario::default();
        Self {
            big_n: sc.big_n,
            n_small: sc.n_small,
            k_exp: sc.k_exp,
            tau_star: sc.tau_star,
            m_threshold: sc.m_threshold,
            large_amplitude: sc.large_amplitude,
            small_amplitude: sc.small_amplitude,
            small_sign: sc.small_sign,
            seed: sc.seed,
            grid: GridSpec {
                n: sc.grid.n(),
                half_width: sc.grid.half_width(),
            },
            perturbation: sc.perturbation,
            remainder: sc.remainder,
            run: RunConfig::default(),
            tracers: SeedConfig::default(),
            study: StudyParams::default(),
        }
    }
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?.validate()?;
        self.run.validate()?;
        self.run.filter.build()?;
        let p = &self.study;
        if p.radii < 32 {
            return Err(Error::config("study.radii must be at least 32"));
        }
        if !(p.dtheta.is_finite() && p.dtheta > 0.0) {
            return Err(Error::config("study.dtheta must be positive"));
        }
        if !(p.prescribed_t.is_finite() && p.prescribed_t > 0.0) {
            return Err(Error::config("study.prescribed_t must be positive"));
        }
        if p.kernels.is_empty() {
            return Err(Error::config("study.kernels must not be empty"));
        }
        let reg = crate::diagnostics::kernel_registry();
        for k in &p.kernels {
            reg.get(k)?;
        }
        if ((p.direction[0].hypot(p.direction[1])) - 1.0).abs() > 1e-12 {
            return Err(Error::config("study.direction must be a unit vector"));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<VorticityScenario> {
        Ok(VorticityScenario {
            big_n: self.big_n,
            n_small: self.n_small,
            k_exp: self.k_exp,
            tau_star: self.tau_star,
            m_threshold: self.m_threshold,
            large_amplitude: self.large_amplitude,
            small_amplitude: self.small_amplitude,
            small_sign: self.small_sign,
            perturbation: self.perturbation,
            remainder: self.remainder,
            grid: Grid::new(self.grid.n, self.grid.half_width).map_err(|e| Error::config(e.to_string()))?,
            seed: self.seed,
        })
    }

    pub fn distances(&self) -> Vec<f64> {
        self.study
            .distances
            .clone()
            .unwrap_or_else(|| [0.5, 1.0, 2.0].iter().map(|f| f * self.grid.half_width / 4.0).collect())
    }

    pub fn probe(&self, jobs: usize) -> ProbeConfig {
        ProbeConfig {
            run: self.run.clone(),
            seeds: self.tracers,
            direction: self.study.direction,
            jobs,
        }
    }

    /// Fully resolved config as TOML; parsing it back gives `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 8 hex digits of the SHA-256 of [`Self::to_toml`].
    pub fn short_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
    }
}
