use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::registry::Registry;
use crate::spectral::ScalarField;
use crate::{Error, Result};

/// Optional spectral smoothing applied to the vorticity after each step.
pub trait SpectralFilter: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    /// Multiplier for mode numbers `(m1, m2)`; `cutoff` is the largest mode
    /// kept by dealiasing.
    fn multiplier(&self, m1: i64, m2: i64, cutoff: i64) -> f64;

    fn is_identity(&self) -> bool {
        false
    }

    fn apply(&self, f: &ScalarField) -> ScalarField {
        if self.is_identity() {
            return f.clone();
        }
        let cutoff = f.grid().dealias_cutoff();
        f.spectrum()
            .map_mode_numbers(|m1, m2, c| c * self.multiplier(m1, m2, cutoff))
            .to_field()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NoFilter;

impl SpectralFilter for NoFilter {
    fn name(&self) -> &'static str {
        "off"
    }

    fn multiplier(&self, _m1: i64, _m2: i64, _cutoff: i64) -> f64 {
        1.0
    }

    fn is_identity(&self) -> bool {
        true
    }
}

/// `exp(-strength (|m| / cutoff)^order)`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialFilter {
    pub strength: f64,
    pub order: f64,
}

impl SpectralFilter for ExponentialFilter {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn multiplier(&self, m1: i64, m2: i64, cutoff: i64) -> f64 {
        let rho = ((m1 * m1 + m2 * m2) as f64).sqrt() / cutoff as f64;
        (-self.strength * rho.powf(self.order)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub kind: String,
    pub strength: f64,
    pub order: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            kind: "off".into(),
            strength: 36.0,
            order: 36.0,
        }
    }
}

impl FilterConfig {
    pub fn exponential() -> Self {
        Self {
            kind: "exponential".into(),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<Arc<dyn SpectralFilter>> {
        let registry = filter_registry();
        let make = registry.get(&self.kind)?;
        make(self)
    }
}

type FilterFactory = dyn Fn(&FilterConfig) -> Result<Arc<dyn SpectralFilter>> + Send + Sync;

pub fn filter_registry() -> Registry<FilterFactory> {
    let mut r: Registry<FilterFactory> = Registry::new("filter");
    r.register("off", Box::new(|_| Ok(Arc::new(NoFilter))));
    r.register(
        "exponential",
        Box::new(|c| {
            if !(c.strength > 0.0 && c.strength.is_finite() && c.order > 0.0 && c.order.is_finite())
            {
                return Err(Error::config("filter strength and order must be positive"));
            }
            Ok(Arc::new(ExponentialFilter {
                strength: c.strength,
                order: c.order,
            }))
        }),
    );
    r
}
