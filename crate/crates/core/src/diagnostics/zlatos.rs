use std::f64::consts::PI;

use serde::Serialize;

use crate::lagrangian::interp_velocity;
use crate::registry::Registry;
use crate::spectral::{ScalarField, VectorField};
use crate::{Error, Result};

/// Diagonal sweep points `h = m dx_512`, node-aligned on `512^2` and finer
/// power-of-two grids over the same box.
pub const SWEEP_STEPS: [u32; 16] = [2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 19, 22, 26, 30, 35];

/// Quadrant kernel `y1 y2 / |y|^p` of the `Q` integral.
pub trait ZlatosKernel: Send + Sync {
    fn name(&self) -> &'static str;
    fn exponent(&self) -> f64;

    fn weight(&self, y1: f64, y2: f64) -> f64 {
        let rr = y1 * y1 + y2 * y2;
        y1 * y2 / rr.powf(0.5 * self.exponent())
    }
}

struct PowerKernel {
    name: &'static str,
    exponent: f64,
}

impl ZlatosKernel for PowerKernel {
    fn name(&self) -> &'static str {
        self.name
    }

    fn exponent(&self) -> f64 {
        self.exponent
    }
}

/// `quartic` (`|y|^4`, the default) and `quadratic` (`|y|^2`).
pub fn kernel_registry() -> Registry<dyn ZlatosKernel> {
    let mut r: Registry<dyn ZlatosKernel> = Registry::new("zlatos kernel");
    r.register(
        "quartic",
        Box::new(PowerKernel {
            name: "quartic",
            exponent: 4.0,
        }),
    );
    r.register(
        "quadratic",
        Box::new(PowerKernel {
            name: "quadratic",
            exponent: 2.0,
        }),
    );
    r
}

fn check_point(omega: &ScalarField, x: [f64; 2]) -> Result<()> {
    let half = 0.5 * omega.grid().half_width();
    if !(x[0] > 0.0 && x[1] > 0.0 && x[0] < half && x[1] < half) {
        return Err(Error::invalid(format!(
            "point {x:?} is outside the open quadrant (0, {half})^2"
        )));
    }
    Ok(())
}

fn check_odd_odd(omega: &ScalarField) -> Result<()> {
    let asym = omega.odd_asymmetry();
    if asym > 1e-8 * omega.l2_physical().max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(format!(
            "vorticity is not odd-odd (asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// `(4/pi) int_{[2x1, L) x [2x2, L)} K(y) omega(y) dy` by grid quadrature;
/// nodes on the lower edges get half weight.
pub fn zlatos_q(omega: &ScalarField, x: [f64; 2], kernel: &dyn ZlatosKernel) -> Result<f64> {
    check_point(omega, x)?;
    check_odd_odd(omega)?;
    Ok(q_unchecked(omega, x, kernel))
}

fn q_unchecked(omega: &ScalarField, x: [f64; 2], kernel: &dyn ZlatosKernel) -> f64 {
    let grid = omega.grid();
    let n = grid.n();
    let dx = grid.dx();
    let half = n / 2;
    let edge = |lo: f64, i: usize| {
        let y = (i - half) as f64 * dx;
        if y < lo - 1e-9 * dx {
            None
        } else if (y - lo).abs() <= 1e-9 * dx {
            Some((y, 0.5))
        } else {
            Some((y, 1.0))
        }
    };
    let mut total = 0.0;
    for i1 in half..n {
        let Some((y1, w1)) = edge(2.0 * x[0], i1) else {
            continue;
        };
        let mut row = 0.0;
        for i2 in half..n {
            let Some((y2, w2)) = edge(2.0 * x[1], i2) else {
                continue;
            };
            let v = omega.at(i1, i2);
            if v != 0.0 {
                row += w2 * kernel.weight(y1, y2) * v;
            }
        }
        total += w1 * row;
    }
    4.0 / PI * total * grid.cell_area()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZlatosResidual {
    pub x: [f64; 2],
    pub i: u8,
    pub u_over_x: f64,
    pub q: f64,
    /// `B_i = u^i / x_i - (-1)^i Q`.
    pub b: f64,
    /// `1 + log(1 + x_{3-i} / x_i)`.
    pub bound: f64,
    pub exponent: f64,
}

impl ZlatosResidual {
    pub fn ratio(&self) -> f64 {
        self.b.abs() / self.bound
    }
}

pub fn zlatos_residual(
    omega: &ScalarField,
    u: &VectorField,
    x: [f64; 2],
    i: u8,
    kernel: &dyn ZlatosKernel,
) -> Result<ZlatosResidual> {
    if !(i == 1 || i == 2) {
        return Err(Error::invalid("component index must be 1 or 2"));
    }
    let q = zlatos_q(omega, x, kernel)?;
    let k = (i - 1) as usize;
    let v = interp_velocity(u, x);
    let u_over_x = v[k] / x[k];
    let sign = if i == 1 { -1.0 } else { 1.0 };
    let b = u_over_x - sign * q;
    let bound = 1.0 + (1.0 + x[1 - k] / x[k]).ln();
    Ok(ZlatosResidual {
        x,
        i,
        u_over_x,
        q,
        b,
        bound,
        exponent: kernel.exponent(),
    })
}

/// Diagonal points `(h, h)` with `h = m (2L / 512)` for `m` in
/// [`SWEEP_STEPS`].
pub fn diagonal_sweep(half_width: f64) -> Vec<[f64; 2]> {
    let dx = 2.0 * half_width / 512.0;
    SWEEP_STEPS
        .iter()
        .map(|&m| {
            let h = m as f64 * dx;
            [h, h]
        })
        .collect()
}

/// Smallest `C` with `|B_i| <= C bound` over the rows.
pub fn fit_constant(rows: &[ZlatosResidual]) -> f64 {
    rows.iter().fold(0.0, |c, r| c.max(r.ratio()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{biot_savart, Grid};

    fn grid() -> Grid {
        Grid::new(128, PI).unwrap()
    }

    fn odd_bump(g: Grid) -> ScalarField {
        // odd-odd sum of four Gaussians centred at (+-1, +-1)
        ScalarField::from_fn(g, |x| {
            let b = |a: f64, c: f64| (-8.0 * ((x[0] - a).powi(2) + (x[1] - c).powi(2))).exp();
            b(1.0, 1.0) - b(-1.0, 1.0) - b(1.0, -1.0) + b(-1.0, -1.0)
        })
    }

    #[test]
    fn zero_and_sign() {
        let reg = kernel_registry();
        let k = reg.get("quartic").unwrap();
        let g = grid();
        assert_eq!(zlatos_q(&ScalarField::zeros(g), [0.1, 0.1], k).unwrap(), 0.0);
        let w = odd_bump(g);
        assert!(zlatos_q(&w, [0.1, 0.2], k).unwrap() > 0.0);
        assert!(zlatos_q(&w, [0.0, 0.2], k).is_err());
        assert!(zlatos_q(&w, [2.0, 0.2], k).is_err());
        let lopsided = w.add(&ScalarField::from_fn(g, |x| (x[0] + 0.3).sin() * 1e-3));
        assert!(zlatos_q(&lopsided, [0.1, 0.1], k).is_err());
    }

    #[test]
    fn residual_formula() {
        let reg = kernel_registry();
        let k = reg.get("quartic").unwrap();
        let g = grid();
        let z = ScalarField::zeros(g);
        let r = zlatos_residual(&z, &VectorField::zeros(g), [0.2, 0.2], 1, k).unwrap();
        assert_eq!(r.b, 0.0);
        assert!((r.bound - (1.0 + 2f64.ln())).abs() < 1e-15);

        let w = odd_bump(g);
        let u = biot_savart(&w).unwrap();
        let r1 = zlatos_residual(&w, &u, [0.1, 0.1], 1, k).unwrap();
        assert!((r1.b - (r1.u_over_x + r1.q)).abs() < 1e-15);
        let r2 = zlatos_residual(&w, &u, [0.1, 0.1], 2, k).unwrap();
        assert!((r2.b - (r2.u_over_x - r2.q)).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // omega = 1 on the quadrant square [0.5, 1.5]^2 (odd-odd extended);
        // with x -> 0 the quartic integral of y1 y2 / |y|^4 has a closed form
        // via int int y1 y2/(y1^2+y2^2)^2 = -1/4 ln(y1^2 + y2^2) antiderivative
        // in mixed form F(a,b) = -ln(a^2+b^2)/4.
        let g = Grid::new(512, PI).unwrap();
        let w = ScalarField::from_fn(g, |x| {
            let inside = |a: f64| (0.5..=1.5).contains(&a.abs());
            if inside(x[0]) && inside(x[1]) {
                x[0].signum() * x[1].signum()
            } else {
                0.0
            }
        });
        let f = |a: f64, b: f64| -(a * a + b * b).ln() / 4.0;
        let exact = 4.0 / PI * (f(1.5, 1.5) - f(0.5, 1.5) - f(1.5, 0.5) + f(0.5, 0.5));
        let k = PowerKernel {
            name: "quartic",
            exponent: 4.0,
        };
        let q = q_unchecked(&w, [1e-3, 1e-3], &k);
        assert!((q / exact - 1.0).abs() < 2e-2, "{q} vs {exact}");
    }

    #[test]
    fn sweep_is_node_aligned() {
        for n in [512usize, 1024] {
            let g = Grid::new(n, PI).unwrap();
            for p in diagonal_sweep(PI) {
                let s = p[0] / g.dx();
                assert!((s - s.round()).abs() < 1e-9);
            }
        }
    }
}
