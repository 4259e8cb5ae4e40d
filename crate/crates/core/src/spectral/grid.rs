use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Square periodic box `[-L, L)^2` sampled at `n x n` points.
///
/// Samples are stored row-major with x2 varying fastest: index `i1 * n + i2`
/// holds the value at `(x1, x2) = (-L + i1 dx, -L + i2 dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid resolution must be a power of two >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!(
                "box half-width must be positive, got {half_width}"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let dx = self.dx();
        dx * dx
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx / self.n), self.coord(idx % self.n)]
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    /// Index of the grid point mirrored through `x1 -> -x1`.
    #[inline]
    pub fn mirror1(&self, i1: usize) -> usize {
        (self.n - i1) % self.n
    }

    /// Fundamental wavenumber `2 pi / (2 L)`.
    pub fn k0(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Signed integer mode number for FFT bin `j`.
    #[inline]
    pub fn mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Physical wavenumber for FFT bin `j` along either axis.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 * self.k0()
    }

    /// Largest mode kept by the 2/3 truncation (`|m| <= n/3`).
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Minimal-image displacement `b - a` on the torus.
    pub fn periodic_delta(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let p = 2.0 * self.half_width;
        let wrap = |d: f64| d - p * (d / p).round();
        [wrap(b[0] - a[0]), wrap(b[1] - a[1])]
    }

    /// Wraps a coordinate into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let p = 2.0 * self.half_width;
        let y = (x + self.half_width).rem_euclid(p) - self.half_width;
        if y >= self.half_width {
            -self.half_width
        } else {
            y
        }
    }
}
