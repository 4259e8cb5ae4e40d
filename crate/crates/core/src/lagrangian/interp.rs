//! Periodic 4x4 cubic Lagrange interpolation.

use crate::spectral::{ScalarField, VectorField};

/// Stencil base index and the four weights for nodes `i-1 .. i+2`.
#[inline]
pub(crate) fn stencil(n: usize, half_width: f64, dx: f64, x: f64) -> (usize, [f64; 4]) {
    let s = (x + half_width) / dx;
    let fl = s.floor();
    let f = s - fl;
    let i = (fl as i64).rem_euclid(n as i64) as usize;
    let w = [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ];
    (i, w)
}

/// Precomputed stencil for a point; reused across several fields.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    rows: [usize; 4],
    cols: [usize; 4],
    w1: [f64; 4],
    w2: [f64; 4],
}

impl Stencil {
    pub(crate) fn new(grid: crate::spectral::Grid, x: [f64; 2]) -> Self {
        let n = grid.n();
        let (i1, w1) = stencil(n, grid.half_width(), grid.dx(), x[0]);
        let (i2, w2) = stencil(n, grid.half_width(), grid.dx(), x[1]);
        let wrap = |i: usize, d: usize| (i + n + d - 1) % n;
        Self {
            rows: [wrap(i1, 0), wrap(i1, 1), wrap(i1, 2), wrap(i1, 3)],
            cols: [wrap(i2, 0), wrap(i2, 1), wrap(i2, 2), wrap(i2, 3)],
            w1,
            w2,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, n: usize, samples: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..4 {
            let row = &samples[self.rows[a] * n..(self.rows[a] + 1) * n];
            let mut r = 0.0;
            for b in 0..4 {
                r += self.w2[b] * row[self.cols[b]];
            }
            acc += self.w1[a] * r;
        }
        acc
    }
}

pub fn interp_scalar(f: &ScalarField, x: [f64; 2]) -> f64 {
    Stencil::new(f.grid(), x).apply(f.grid().n(), f.samples())
}

pub fn interp_velocity(u: &VectorField, x: [f64; 2]) -> [f64; 2] {
    let grid = u.grid();
    let st = Stencil::new(grid, x);
    [st.apply(grid.n(), u.u1.samples()), st.apply(grid.n(), u.u2.samples())]
}
