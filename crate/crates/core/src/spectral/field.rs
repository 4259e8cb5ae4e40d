use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::{Error, Result};

/// Fourier coefficients of a real field: `f(x) = sum_k c_k exp(i k.x)`.
///
/// Only the half plane `k2 >= 0` is stored; the rest follows from Hermitian
/// symmetry. Coefficients are laid out `[j2][j1]` with `j2 in 0..=n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        let h = grid.n() / 2 + 1;
        Self {
            grid,
            coeffs: vec![Complex64::default(); h * grid.n()],
        }
    }

    pub(crate) fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), (grid.n() / 2 + 1) * grid.n());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Number of stored `j2` rows (`n/2 + 1`).
    pub fn rows(&self) -> usize {
        self.grid.n() / 2 + 1
    }

    /// Coefficient at FFT bins `(j1, j2)` with `j2 <= n/2`.
    pub fn get(&self, j1: usize, j2: usize) -> Complex64 {
        self.coeffs[j2 * self.grid.n() + j1]
    }

    /// Multiplicity of a stored row in the full Hermitian plane.
    #[inline]
    pub fn row_weight(&self, j2: usize) -> f64 {
        if j2 == 0 || j2 == self.grid.n() / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Zero-mode coefficient, i.e. the spatial mean.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies `f(k1, k2, c)` to every stored coefficient.
    pub fn map_modes<F>(&self, f: F) -> Spectrum
    where
        F: Fn(f64, f64, Complex64) -> Complex64 + Sync,
    {
        let grid = self.grid;
        let n = grid.n();
        let mut out = self.coeffs.clone();
        out.par_chunks_mut(n).enumerate().for_each(|(j2, row)| {
            let k2 = j2 as f64 * grid.k0();
            for (j1, c) in row.iter_mut().enumerate() {
                *c = f(grid.wavenumber(j1), k2, *c);
            }
        });
        Spectrum {
            grid,
            coeffs: out,
        }
    }

    /// Like [`Spectrum::map_modes`] but with integer mode numbers.
    pub fn map_mode_numbers<F>(&self, f: F) -> Spectrum
    where
        F: Fn(i64, i64, Complex64) -> Complex64 + Sync,
    {
        let grid = self.grid;
        let n = grid.n();
        let mut out = self.coeffs.clone();
        out.par_chunks_mut(n).enumerate().for_each(|(j2, row)| {
            let m2 = j2 as i64;
            for (j1, c) in row.iter_mut().enumerate() {
                *c = f(grid.mode(j1), m2, *c);
            }
        });
        Spectrum {
            grid,
            coeffs: out,
        }
    }

    /// `(2L)^2 sum_k w(k) |c_k|^2` over the full plane, summed in a fixed order.
    pub fn weighted_power<F>(&self, w: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let grid = self.grid;
        let n = grid.n();
        let partial: Vec<f64> = self
            .coeffs
            .par_chunks(n)
            .enumerate()
            .map(|(j2, row)| {
                let k2 = j2 as f64 * grid.k0();
                let rw = self.row_weight(j2);
                row.iter()
                    .enumerate()
                    .map(|(j1, c)| rw * w(grid.wavenumber(j1), k2) * c.norm_sqr())
                    .sum::<f64>()
            })
            .collect();
        grid.area() * partial.iter().sum::<f64>()
    }

    /// Plancherel inner product `integral f g dx`.
    pub fn inner(&self, other: &Spectrum) -> f64 {
        self.weighted_inner(other, |_, _| 1.0)
    }

    /// `(2L)^2 sum_k w(k) Re(a_k conj(b_k))` over the full plane.
    pub fn weighted_inner<F>(&self, other: &Spectrum, w: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        assert_eq!(self.grid, other.grid, "spectra on different grids");
        let grid = self.grid;
        let n = grid.n();
        let partial: Vec<f64> = self
            .coeffs
            .par_chunks(n)
            .zip(other.coeffs.par_chunks(n))
            .enumerate()
            .map(|(j2, (a, b))| {
                let k2 = j2 as f64 * grid.k0();
                let rw = self.row_weight(j2);
                a.iter()
                    .zip(b)
                    .enumerate()
                    .map(|(j1, (x, y))| rw * w(grid.wavenumber(j1), k2) * (x * y.conj()).re)
                    .sum::<f64>()
            })
            .collect();
        grid.area() * partial.iter().sum::<f64>()
    }

    pub fn scale(&self, s: f64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Spectrum) -> Spectrum {
        assert_eq!(self.grid, other.grid, "spectra on different grids");
        Spectrum {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn to_field(&self) -> ScalarField {
        let samples = fft::plan(self.grid.n()).inverse(&self.coeffs);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        ScalarField::from_parts(self.grid, samples)
    }
}

#[derive(Debug)]
struct FieldData {
    samples: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

/// Real scalar field on a [`Grid`], immutable once built.
///
/// The physical samples are canonical; the spectrum is computed from them on
/// first use and cached, so two fields with identical samples always have
/// bit-identical spectra.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    data: Arc<FieldData>,
}

impl ScalarField {
    fn from_parts(grid: Grid, samples: Vec<f64>) -> Self {
        Self {
            grid,
            data: Arc::new(FieldData {
                samples,
                spectrum: OnceLock::new(),
            }),
        }
    }

    pub fn from_samples(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self::from_parts(grid, samples))
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()])
    }

    /// Samples `f(x1, x2)` at every grid point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 2]) -> f64 + Sync,
    {
        let n = grid.n();
        let mut samples = vec![0.0; grid.len()];
        samples.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
            let x1 = grid.coord(i1);
            for (i2, v) in row.iter_mut().enumerate() {
                *v = f([x1, grid.coord(i2)]);
            }
        });
        Self::from_parts(grid, samples)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.data.samples
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.data.spectrum.get_or_init(|| {
            Spectrum::from_coeffs(
                self.grid,
                fft::plan(self.grid.n()).forward(&self.data.samples),
            )
        })
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.data.samples[self.grid.index(i1, i2)]
    }

    pub fn sup(&self) -> f64 {
        self.samples().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.samples().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid quadrature of the field over the box.
    pub fn integral(&self) -> f64 {
        fixed_order_sum(self.samples(), self.grid.n(), |v| v) * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.area()
    }

    /// `integral |f|^p dx` by grid quadrature.
    pub fn lp_integral(&self, p: f64) -> f64 {
        fixed_order_sum(self.samples(), self.grid.n(), |v| v.abs().powf(p))
            * self.grid.cell_area()
    }

    /// L2 norm evaluated in physical space.
    pub fn l2_physical(&self) -> f64 {
        (fixed_order_sum(self.samples(), self.grid.n(), |v| v * v) * self.grid.cell_area())
            .sqrt()
    }

    /// `integral f g dx` by grid quadrature.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        let n = self.grid.n();
        let partial: Vec<f64> = self
            .samples()
            .par_chunks(n)
            .zip(other.samples().par_chunks(n))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .collect();
        partial.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let samples: Vec<f64> = self.samples().par_iter().map(|&v| f(v)).collect();
        Self::from_parts(self.grid, samples)
    }

    pub fn zip_with<F>(&self, other: &ScalarField, f: F) -> ScalarField
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        let samples: Vec<f64> = self
            .samples()
            .par_iter()
            .zip(other.samples().par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_parts(self.grid, samples)
    }

    /// Pointwise map with access to the grid coordinates.
    pub fn map_with_point<F>(&self, f: F) -> ScalarField
    where
        F: Fn([f64; 2], f64) -> f64 + Sync,
    {
        let grid = self.grid;
        let n = grid.n();
        let mut samples = self.samples().to_vec();
        samples.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
            let x1 = grid.coord(i1);
            for (i2, v) in row.iter_mut().enumerate() {
                *v = f([x1, grid.coord(i2)], *v);
            }
        });
        Self::from_parts(grid, samples)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// Field mirrored through `x1 -> -x1`.
    pub fn reflect_x1(&self) -> ScalarField {
        let g = self.grid;
        let n = g.n();
        let src = self.samples();
        let mut samples = vec![0.0; g.len()];
        samples.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
            let m = g.mirror1(i1);
            row.copy_from_slice(&src[m * n..(m + 1) * n]);
        });
        Self::from_parts(g, samples)
    }

    /// Field mirrored through `x2 -> -x2`.
    pub fn reflect_x2(&self) -> ScalarField {
        let g = self.grid;
        let n = g.n();
        let src = self.samples();
        let mut samples = vec![0.0; g.len()];
        samples.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
            for (i2, v) in row.iter_mut().enumerate() {
                *v = src[i1 * n + g.mirror1(i2)];
            }
        });
        Self::from_parts(g, samples)
    }

    /// L2 distance of the field from odd-odd symmetry: the larger of
    /// `||f + f(-x1, x2)||` and `||f + f(x1, -x2)||`.
    pub fn odd_asymmetry(&self) -> f64 {
        let a = self.add(&self.reflect_x1()).l2_physical();
        let b = self.add(&self.reflect_x2()).l2_physical();
        a.max(b)
    }
}

/// Sum over rows computed independently, then combined in row order, so the
/// result does not depend on the thread count.
pub(crate) fn fixed_order_sum<F>(samples: &[f64], row: usize, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let partial: Vec<f64> = samples
        .par_chunks(row)
        .map(|r| r.iter().map(|&v| f(v)).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Two-component field on a shared grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VectorField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::invalid("vector components on different grids"));
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 2]) -> [f64; 2] + Sync,
    {
        Self {
            u1: ScalarField::from_fn(grid, |x| f(x)[0]),
            u2: ScalarField::from_fn(grid, |x| f(x)[1]),
        }
    }

    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    /// `max |u|` over grid points (Euclidean length).
    pub fn sup(&self) -> f64 {
        self.u1
            .samples()
            .iter()
            .zip(self.u2.samples())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// `max(sup|u1|, sup|u2|)`.
    pub fn sup_component(&self) -> f64 {
        self.u1.sup().max(self.u2.sup())
    }

    /// `||u||_{L2}^2` by Plancherel.
    pub fn energy(&self) -> f64 {
        self.u1.spectrum().weighted_power(|_, _| 1.0)
            + self.u2.spectrum().weighted_power(|_, _| 1.0)
    }

    pub fn l2(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `integral u.v dx` by grid quadrature.
    pub fn inner(&self, other: &VectorField) -> f64 {
        self.u1.inner(&other.u1) + self.u2.inner(&other.u2)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            u1: self.u1.add(&other.u1),
            u2: self.u2.add(&other.u2),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            u1: self.u1.sub(&other.u1),
            u2: self.u2.sub(&other.u2),
        }
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField {
            u1: self.u1.scale(s),
            u2: self.u2.scale(s),
        }
    }
}
