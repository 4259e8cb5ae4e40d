//! Spectral operators on [`ScalarField`] and [`VectorField`].

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, Spectrum, VectorField};
use super::grid::Grid;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative tolerance on the mean of a vorticity handed to Biot-Savart.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn is_nyquist(grid: Grid, k1: f64, k2: f64) -> bool {
    let kn = grid.k0() * (grid.n() / 2) as f64;
    (k1.abs() - kn).abs() < 0.5 * grid.k0() || (k2.abs() - kn).abs() < 0.5 * grid.k0()
}

/// Spectrum of `d f / d x_axis` (axis 0 = x1, 1 = x2). Nyquist modes are
/// dropped since their derivative is not representable by a real field.
pub fn derivative_spectrum(spec: &Spectrum, axis: usize) -> Spectrum {
    let grid = spec.grid();
    spec.map_modes(|k1, k2, c| {
        if is_nyquist(grid, k1, k2) {
            Complex64::default()
        } else {
            let k = if axis == 0 { k1 } else { k2 };
            I * k * c
        }
    })
}

/// Velocity spectra `(u1, u2)` from a vorticity spectrum:
/// `u_hat = i (k2, -k1) w_hat / |k|^2`, zero mode removed.
pub fn biot_savart_spectrum(omega: &Spectrum) -> (Spectrum, Spectrum) {
    let grid = omega.grid();
    let u1 = omega.map_modes(|k1, k2, c| {
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 || is_nyquist(grid, k1, k2) {
            Complex64::default()
        } else {
            I * k2 * c / kk
        }
    });
    let u2 = omega.map_modes(|k1, k2, c| {
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 || is_nyquist(grid, k1, k2) {
            Complex64::default()
        } else {
            -I * k1 * c / kk
        }
    });
    (u1, u2)
}

/// Periodic Biot-Savart law `u = grad^perp Laplacian^{-1} omega`.
///
/// Rejects vorticity whose mean exceeds `1e-10 sup|omega|`: on the plane such
/// data has infinite kinetic energy.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    let sup = omega.sup();
    let mean = omega.spectrum().mean();
    if mean.abs() > MEAN_ZERO_TOL * sup {
        return Err(Error::invalid(format!(
            "vorticity must have zero mean (mean {mean:.3e}, sup {sup:.3e})"
        )));
    }
    let (u1, u2) = biot_savart_spectrum(omega.spectrum());
    Ok(VectorField {
        u1: u1.to_field(),
        u2: u2.to_field(),
    })
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    VectorField {
        u1: derivative_spectrum(s, 0).to_field(),
        u2: derivative_spectrum(s, 1).to_field(),
    }
}

pub fn divergence(u: &VectorField) -> ScalarField {
    derivative_spectrum(u.u1.spectrum(), 0)
        .add(&derivative_spectrum(u.u2.spectrum(), 1))
        .to_field()
}

/// 2/3-rule projection on a spectrum: zero every mode with
/// `max(|m1|, |m2|) > n/3`.
pub fn dealias_spectrum(spec: &Spectrum) -> Spectrum {
    let cutoff = spec.grid().dealias_cutoff();
    spec.map_mode_numbers(|m1, m2, c| {
        if m1.abs().max(m2.abs()) > cutoff {
            Complex64::default()
        } else {
            c
        }
    })
}

pub fn dealias(f: &ScalarField) -> ScalarField {
    dealias_spectrum(f.spectrum()).to_field()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub sup: f64,
    /// `||grad f||_{L2}`; for vorticity this is the palinstrophy norm.
    pub h1_seminorm: f64,
}

pub fn norms(f: &ScalarField) -> Norms {
    let spec = f.spectrum();
    let grid = f.grid();
    Norms {
        l2: spec.weighted_power(|_, _| 1.0).sqrt(),
        sup: f.sup(),
        h1_seminorm: spec
            .weighted_power(|k1, k2| {
                if is_nyquist(grid, k1, k2) {
                    0.0
                } else {
                    k1 * k1 + k2 * k2
                }
            })
            .sqrt(),
    }
}

/// Inhomogeneous Sobolev norm with weights `(1 + |k|^2)^{s/2}`.
pub fn sobolev_norm(f: &ScalarField, s: f64) -> f64 {
    f.spectrum()
        .weighted_power(|k1, k2| (1.0 + k1 * k1 + k2 * k2).powf(s))
        .sqrt()
}

/// `||u||_{H^s}` of the Biot-Savart velocity of `omega`, computed directly
/// from the vorticity spectrum (`|u_hat|^2 = |w_hat|^2 / |k|^2`).
pub fn velocity_sobolev_norm(omega: &ScalarField, s: f64) -> f64 {
    let grid = omega.grid();
    omega
        .spectrum()
        .weighted_power(|k1, k2| {
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 || is_nyquist(grid, k1, k2) {
                0.0
            } else {
                (1.0 + kk).powf(s) / kk
            }
        })
        .sqrt()
}

/// `integral u_a . u_b dx` for the Biot-Savart velocities of two
/// vorticities, evaluated spectrally.
pub fn velocity_inner(omega_a: &ScalarField, omega_b: &ScalarField) -> f64 {
    let grid = omega_a.grid();
    omega_a.spectrum().weighted_inner(omega_b.spectrum(), |k1, k2| {
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 || is_nyquist(grid, k1, k2) {
            0.0
        } else {
            1.0 / kk
        }
    })
}

/// Fourier multiplier of the unit-mass Gaussian `G_l(r) = l^-2 G(r/l)`,
/// `G(r) = (6/pi) exp(-6|r|^2)`.
pub fn gaussian_filter_multiplier(k1: f64, k2: f64, ell: f64) -> f64 {
    (-(k1 * k1 + k2 * k2) * ell * ell / 24.0).exp()
}

/// Large-scale field `u_bar_l = G_l * u`, evaluated as a spectral multiplier.
pub fn coarse_grain(u: &VectorField, ell: f64) -> Result<VectorField> {
    let limit = u.grid().half_width() / 4.0;
    if !(ell > 0.0 && ell <= limit) {
        return Err(Error::invalid(format!(
            "filter width must lie in (0, L/4 = {limit}], got {ell}"
        )));
    }
    let filt = |s: &Spectrum| {
        s.map_modes(|k1, k2, c| c * gaussian_filter_multiplier(k1, k2, ell))
            .to_field()
    };
    Ok(VectorField {
        u1: filt(u.u1.spectrum()),
        u2: filt(u.u2.spectrum()),
    })
}

/// Velocity gradient `[i][j] = d u_i / d x_j`.
pub fn velocity_gradient(u: &VectorField) -> [[ScalarField; 2]; 2] {
    let d = |f: &ScalarField, axis| derivative_spectrum(f.spectrum(), axis).to_field();
    [
        [d(&u.u1, 0), d(&u.u1, 1)],
        [d(&u.u2, 0), d(&u.u2, 1)],
    ]
}

/// Symmetric part of the velocity gradient.
#[derive(Debug, Clone)]
pub struct StrainTensor {
    pub s11: ScalarField,
    pub s12: ScalarField,
    pub s22: ScalarField,
}

pub fn strain_tensor(u: &VectorField) -> StrainTensor {
    let [[a11, a12], [a21, a22]] = velocity_gradient(u);
    StrainTensor {
        s11: a11,
        s12: a12.zip_with(&a21, |a, b| 0.5 * (a + b)),
        s22: a22,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Grid {
        Grid::new(n, PI).unwrap()
    }

    fn max_err(a: &ScalarField, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let g = a.grid();
        (0..g.len())
            .map(|i| (a.samples()[i] - f(g.point(i))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn biot_savart_of_zero_is_zero() {
        let u = biot_savart(&ScalarField::zeros(torus(32))).unwrap();
        assert_eq!(u.sup(), 0.0);
    }

    #[test]
    fn biot_savart_taylor_green_eigenfunction() {
        // omega = 2 sin x1 sin x2 = -Laplacian(sin x1 sin x2); psi = -sin x1 sin x2,
        // u = (-d2 psi, d1 psi) = (sin x1 cos x2, -cos x1 sin x2).
        let g = torus(64);
        let w = ScalarField::from_fn(g, |x| 2.0 * x[0].sin() * x[1].sin());
        let u = biot_savart(&w).unwrap();
        assert!(max_err(&u.u1, |x| x[0].sin() * x[1].cos()) < 1e-12);
        assert!(max_err(&u.u2, |x| -x[0].cos() * x[1].sin()) < 1e-12);
        // curl recovers omega
        let curl = derivative_spectrum(u.u2.spectrum(), 0)
            .add(&derivative_spectrum(u.u1.spectrum(), 1).scale(-1.0))
            .to_field();
        assert!(max_err(&curl, |x| 2.0 * x[0].sin() * x[1].sin()) < 1e-12);
    }

    #[test]
    fn biot_savart_rejects_nonzero_mean() {
        let g = torus(32);
        let w = ScalarField::from_fn(g, |x| 1.0 + x[0].sin());
        assert!(biot_savart(&w).is_err());
    }

    #[test]
    fn biot_savart_is_divergence_free() {
        let g = torus(64);
        let w = ScalarField::from_fn(g, |x| {
            (-(4.0 * (x[0] - 0.3).powi(2) + 9.0 * x[1].powi(2))).exp() * (x[0] - 0.3)
                + (2.0 * x[0] + x[1]).cos() * 0.2
        });
        let w = w.map(|v| v).sub(&ScalarField::from_fn(g, |_| 0.0));
        let m = w.spectrum().mean();
        let w = w.map(|v| v - m);
        let u = biot_savart(&w).unwrap();
        assert!(divergence(&u).sup() <= 1e-10 * u.sup());
    }

    #[test]
    fn gradient_examples() {
        let g = torus(32);
        let c = gradient(&ScalarField::from_fn(g, |_| 3.5));
        assert!(c.sup() < 1e-14);
        let s = gradient(&ScalarField::from_fn(g, |x| x[0].sin()));
        assert!(max_err(&s.u1, |x| x[0].cos()) < 1e-12);
        assert!(s.u2.sup() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences_second_order() {
        // Centered differences converge at O(h^2) to the spectral derivative
        // of the resolved Gaussian.
        let f = |x: [f64; 2]| (-25.0 * (x[0] * x[0] + x[1] * x[1])).exp();
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let g = torus(n);
            let field = ScalarField::from_fn(g, f);
            let spec = gradient(&field);
            let h = g.dx();
            let mut e: f64 = 0.0;
            for i1 in 0..n {
                for i2 in 0..n {
                    let ip = (i1 + 1) % n;
                    let im = (i1 + n - 1) % n;
                    let fd = (field.at(ip, i2) - field.at(im, i2)) / (2.0 * h);
                    e = e.max((fd - spec.u1.at(i1, i2)).abs());
                }
            }
            errs.push(e);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio} errs {errs:?}");
        }
    }

    #[test]
    fn dealias_examples() {
        let g = torus(48usize.next_power_of_two());
        let n = g.n();
        let band = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() + (5.0 * x[1] - x[0]).cos());
        let d = dealias(&band);
        assert!(max_err(&d, |x| (3.0 * x[0]).sin() + (5.0 * x[1] - x[0]).cos()) < 1e-12);
        let k = (n / 2 - 1) as f64;
        let high = ScalarField::from_fn(g, |x| (k * x[0]).cos());
        assert!(dealias(&high).sup() < 1e-12);
    }

    #[test]
    fn dealias_is_self_adjoint_projection() {
        let g = torus(32);
        let a = ScalarField::from_fn(g, |x| (x[0] * 7.0).sin() * (x[1] * 13.0).cos() + x[1].sin());
        let b = ScalarField::from_fn(g, |x| (x[0] * 11.0 + x[1] * 3.0).cos() + (x[0] * 2.0).sin());
        let lhs = dealias(&a).spectrum().inner(b.spectrum());
        let rhs = a.spectrum().inner(dealias(&b).spectrum());
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn norms_examples() {
        let g = torus(64);
        let z = norms(&ScalarField::zeros(g));
        assert_eq!((z.l2, z.sup, z.h1_seminorm), (0.0, 0.0, 0.0));

        let s = ScalarField::from_fn(g, |x| x[0].sin());
        let nm = norms(&s);
        // integral of sin^2 x1 over [-pi, pi)^2 is 2 pi^2
        assert!((nm.l2 - PI * 2f64.sqrt()).abs() < 1e-12);
        let c = ScalarField::from_fn(g, |x| x[0].cos());
        assert!((nm.h1_seminorm - norms(&c).l2).abs() < 1e-12);
        assert!((nm.l2 - s.l2_physical()).abs() < 1e-12);
        assert!((nm.sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grain_preserves_constants_and_rejects_bad_width() {
        let g = torus(32);
        let u = VectorField::from_fn(g, |_| [1.5, -0.25]);
        let ub = coarse_grain(&u, 0.3).unwrap();
        assert!(max_err(&ub.u1, |_| 1.5) < 1e-12);
        assert!(max_err(&ub.u2, |_| -0.25) < 1e-12);
        assert!(coarse_grain(&u, 0.0).is_err());
        assert!(coarse_grain(&u, PI).is_err());
    }

    #[test]
    fn coarse_grain_gaussian_has_unit_mass() {
        // (6/pi) exp(-6 r^2) integrates to one; midpoint quadrature on a wide box.
        let h = 0.005;
        let mut acc = 0.0;
        let m = 800i64;
        for i in -m..m {
            for j in -m..m {
                let r2 = ((i as f64 + 0.5) * h).powi(2) + ((j as f64 + 0.5) * h).powi(2);
                acc += 6.0 / PI * (-6.0 * r2).exp() * h * h;
            }
        }
        assert!((acc - 1.0).abs() < 1e-10, "{acc}");
    }

    #[test]
    fn coarse_grain_single_mode_matches_physical_convolution() {
        let g = torus(64);
        let ell = 0.5;
        let u = VectorField::from_fn(g, |x| [(2.0 * x[0] + x[1]).sin(), 0.0]);
        let ub = coarse_grain(&u, ell).unwrap();
        let att = (-(5.0) * ell * ell / 24.0).exp();
        assert!(max_err(&ub.u1, |x| att * (2.0 * x[0] + x[1]).sin()) < 1e-12);

        // direct quadrature of integral G_l(r) u(x + r) dr at one point
        let x = [0.4, -0.7];
        let h = 0.004;
        let mut acc = 0.0;
        let m = 500i64;
        for i in -m..m {
            for j in -m..m {
                let r = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                let gl = 6.0 / PI / (ell * ell)
                    * (-6.0 * (r[0] * r[0] + r[1] * r[1]) / (ell * ell)).exp();
                acc += gl * (2.0 * (x[0] + r[0]) + (x[1] + r[1])).sin() * h * h;
            }
        }
        assert!((acc - att * (2.0 * x[0] + x[1]).sin()).abs() < 1e-8, "{acc}");
    }

    #[test]
    fn coarse_grain_converges_monotonically_as_width_halves() {
        let g = torus(64);
        let u = VectorField::from_fn(g, |x| [(3.0 * x[0]).sin() + x[1].cos(), (5.0 * x[1]).cos()]);
        let mut prev = f64::INFINITY;
        let mut ell = PI / 4.0;
        for _ in 0..8 {
            let d = coarse_grain(&u, ell).unwrap().sub(&u).l2();
            assert!(d < prev);
            prev = d;
            ell /= 2.0;
        }
        assert!(prev < 1e-3);
    }

    fn window(x: [f64; 2]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        crate::initcond::bump::smooth_step((3.0 - r) / 2.0)
    }

    #[test]
    fn strain_of_rotation_and_pure_strain() {
        let g = torus(256);
        let rot = VectorField::from_fn(g, |x| {
            let w = window(x);
            [-x[1] * w, x[0] * w]
        });
        let st = strain_tensor(&rot);
        let strain = VectorField::from_fn(g, |x| {
            let w = window(x);
            [x[0] * w, -x[1] * w]
        });
        let sp = strain_tensor(&strain);
        for i in 0..g.len() {
            let x = g.point(i);
            if x[0].hypot(x[1]) < 0.8 {
                assert!(st.s11.samples()[i].abs() < 1e-6);
                assert!(st.s12.samples()[i].abs() < 1e-6);
                assert!(st.s22.samples()[i].abs() < 1e-6);
                assert!((sp.s11.samples()[i] - 1.0).abs() < 1e-6);
                assert!((sp.s22.samples()[i] + 1.0).abs() < 1e-6);
                assert!(sp.s12.samples()[i].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn strain_is_trace_free_for_biot_savart_velocity() {
        let g = torus(64);
        let w = ScalarField::from_fn(g, |x| {
            (2.0 * x[0]).sin() * (3.0 * x[1]).cos() + (x[0] - x[1]).sin()
        });
        let u = biot_savart(&w).unwrap();
        let s = strain_tensor(&u);
        let grad_sup = velocity_gradient(&u)
            .iter()
            .flatten()
            .map(|f| f.sup())
            .fold(0.0, f64::max);
        assert!(s.s11.add(&s.s22).sup() <= 1e-10 * grad_sup);
    }
}
