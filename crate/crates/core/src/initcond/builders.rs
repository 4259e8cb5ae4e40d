use serde::Serialize;

use super::bump::{angular_profile, radial_profile, smooth_step, BumpProfile};
use super::scenario::{SignChoice, VorticityScenario};
use crate::spectral::{biot_savart, velocity_sobolev_norm, Grid, ScalarField, VectorField};
use crate::{Error, Result};

/// Minimum number of grid cells across `[1/(2N), 1/N]`.
pub const LARGE_SCALE_CELLS: f64 = 8.0;

/// Samples an odd-odd field from its first-quadrant restriction.
///
/// Coordinates are taken as `(i - n/2) dx` so that mirrored nodes see
/// bitwise-identical magnitudes; this makes the extension exactly odd.
fn odd_odd_field<F>(grid: Grid, quadrant: F) -> ScalarField
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let half = (grid.n() / 2) as i64;
    let dx = grid.dx();
    let signed = move |i: usize| {
        let m = i as i64 - half;
        (m.signum() as f64, (m.unsigned_abs() as f64) * dx)
    };
    let n = grid.n();
    let mut samples = vec![0.0; grid.len()];
    use rayon::prelude::*;
    samples.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
        let (s1, a) = signed(i1);
        // the row at x1 = -L is its own mirror and must vanish
        if s1 == 0.0 || i1 == 0 {
            return;
        }
        for (i2, v) in row.iter_mut().enumerate() {
            let (s2, b) = signed(i2);
            if s2 == 0.0 || i2 == 0 {
                continue;
            }
            *v = s1 * s2 * quadrant(a, b);
        }
    });
    ScalarField::from_samples(grid, samples).expect("builder samples are finite")
}

/// `omega^L = chi_N(r) psi(theta)` in the first quadrant, odd in both
/// coordinates.
#[derive(Debug, Clone, Copy)]
pub struct LargeScaleVortex {
    pub radial: BumpProfile,
    pub angular: BumpProfile,
    pub amplitude: f64,
}

impl LargeScaleVortex {
    pub fn new(sc: &VorticityScenario) -> Result<Self> {
        Ok(Self {
            radial: radial_profile(sc.big_n)?,
            angular: angular_profile(),
            amplitude: sc.large_amplitude,
        })
    }

    /// Value at `(a, b)` with `a, b >= 0`.
    pub fn quadrant(&self, a: f64, b: f64) -> f64 {
        let r = a.hypot(b);
        let chi = self.radial.eval(r);
        if chi == 0.0 {
            return 0.0;
        }
        self.amplitude * chi * self.angular.eval(b.atan2(a))
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        signum0(x[0]) * signum0(x[1]) * self.quadrant(x[0].abs(), x[1].abs())
    }
}

fn signum0(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

pub fn build_large_scale(sc: &VorticityScenario) -> Result<ScalarField> {
    sc.validate()?;
    let grid = sc.grid;
    let cells = 0.5 / sc.big_n / grid.dx();
    if cells < LARGE_SCALE_CELLS {
        return Err(Error::invalid(format!(
            "grid under-resolves N = {}: {:.2} cells across [1/(2N), 1/N], need {}",
            sc.big_n, cells, LARGE_SCALE_CELLS
        )));
    }
    let outer = 2.0 / sc.big_n.sqrt();
    if outer >= grid.half_width() {
        return Err(Error::invalid(format!(
            "large-scale support radius {outer} does not fit in the box"
        )));
    }
    let vortex = LargeScaleVortex::new(sc)?;
    Ok(odd_odd_field(grid, |a, b| vortex.quadrant(a, b)))
}

/// Smooth tube of half-width `w = 1/(4n)` around the diagonal segment
/// `{(h, h): h0 <= h <= h1}`, odd-odd extended.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmallScaleTube {
    pub h0: f64,
    pub h1: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl SmallScaleTube {
    pub fn new(sc: &VorticityScenario, sign: f64) -> Self {
        let (h0, h1) = sc.small_segment();
        Self {
            h0,
            h1,
            half_width: 0.25 / sc.n_small,
            amplitude: sign * sc.small_amplitude,
        }
    }

    /// Distance from `(a, b)` to the segment.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let along = ((a + b) * s).clamp(self.h0 / s, self.h1 / s);
        let p = along * s;
        (a - p).hypot(b - p)
    }

    pub fn quadrant(&self, a: f64, b: f64) -> f64 {
        let w = self.half_width;
        let d = self.distance(a, b);
        self.amplitude * (1.0 - smooth_step((d - 0.5 * w) / (0.5 * w)))
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        signum0(x[0]) * signum0(x[1]) * self.quadrant(x[0].abs(), x[1].abs())
    }

    /// Radius of the smallest origin-centred disk holding the support.
    pub fn outer_radius(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.h1 + self.half_width
    }
}

fn small_scale_with_sign(sc: &VorticityScenario, sign: f64) -> Result<ScalarField> {
    sc.validate()?;
    let tube = SmallScaleTube::new(sc, sign);
    let grid = sc.grid;
    if tube.h1 <= tube.h0 {
        return Err(Error::invalid(format!(
            "(log N)^(K tau*) = {} must exceed 1",
            sc.log_factor()
        )));
    }
    if tube.outer_radius() >= 1.0 / sc.big_n {
        return Err(Error::invalid(format!(
            "small-scale support radius {} escapes B(1/N) = {}",
            tube.outer_radius(),
            1.0 / sc.big_n
        )));
    }
    if tube.outer_radius() > 0.5 / sc.big_n {
        return Err(Error::invalid(format!(
            "small-scale support radius {} overlaps the large-scale support starting at {}",
            tube.outer_radius(),
            0.5 / sc.big_n
        )));
    }
    if 1.0 / sc.n_small < 2.0 * grid.dx() {
        return Err(Error::invalid(format!(
            "grid under-resolves n = {}: 1/n = {} < 2 dx = {}",
            sc.n_small,
            1.0 / sc.n_small,
            2.0 * grid.dx()
        )));
    }
    Ok(odd_odd_field(grid, |a, b| tube.quadrant(a, b)))
}

/// Builds `omega^S` with the sign `+1`; the scenario sign choice is applied
/// by [`build_components`].
pub fn build_small_scale(sc: &VorticityScenario) -> Result<ScalarField> {
    small_scale_with_sign(sc, 1.0)
}

/// `-1` iff `integral u_L . u_S < 0`.
pub fn choose_small_scale_sign(u0_large: &VectorField, u0_small: &VectorField) -> f64 {
    if u0_large.inner(u0_small) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Node index nearest to `x`.
fn snap_index(grid: Grid, x: f64) -> usize {
    let i = ((x + grid.half_width()) / grid.dx()).round() as i64;
    i.rem_euclid(grid.n() as i64) as usize
}

/// `w1 d1 b + w2 d2 b` for the bump `b = exp(-1/(1 - |x - c|^2 / rho^2))`.
///
/// The centre is snapped to the nearest node and offsets are integer
/// multiples of `dx`, so the field is exactly antisymmetric about the centre
/// and sums to zero. Returns the field and the snapped centre.
pub fn dipole_bump(
    grid: Grid,
    center: [f64; 2],
    radius: f64,
    weights: [f64; 2],
) -> (ScalarField, [f64; 2]) {
    let n = grid.n() as i64;
    let dx = grid.dx();
    let c = [snap_index(grid, center[0]), snap_index(grid, center[1])];
    let offset = move |i: usize, ic: usize| {
        let d = (i as i64 - ic as i64).rem_euclid(n);
        let d = if d >= n / 2 { d - n } else { d };
        d as f64 * dx
    };
    let rr = radius * radius;
    let mut samples = vec![0.0; grid.len()];
    for (idx, v) in samples.iter_mut().enumerate() {
        let d1 = offset(idx / grid.n(), c[0]);
        let d2 = offset(idx % grid.n(), c[1]);
        let q = (d1 * d1 + d2 * d2) / rr;
        if q >= 1.0 {
            continue;
        }
        let g = 1.0 - q;
        let b = (-1.0 / g).exp();
        let db = -b / (g * g) * 2.0 / rr;
        *v = db * (weights[0] * d1 + weights[1] * d2);
    }
    let field = ScalarField::from_samples(grid, samples).expect("finite bump samples");
    (field, [grid.coord(c[0]), grid.coord(c[1])])
}

/// Cells of `f` with `|f| > tol`, and the subset on the support boundary.
fn support_cells(f: &ScalarField, tol: f64) -> (Vec<bool>, Vec<usize>) {
    let grid = f.grid();
    let n = grid.n();
    let mask: Vec<bool> = f.samples().iter().map(|v| v.abs() > tol).collect();
    let mut boundary = Vec::new();
    for (idx, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let (i1, i2) = (idx / n, idx % n);
        let neighbours = [
            grid.index((i1 + 1) % n, i2),
            grid.index((i1 + n - 1) % n, i2),
            grid.index(i1, (i2 + 1) % n),
            grid.index(i1, (i2 + n - 1) % n),
        ];
        if neighbours.iter().any(|&j| !mask[j]) {
            boundary.push(idx);
        }
    }
    (mask, boundary)
}

/// Minimum periodic distance between grid cells where `|a| > tol` and
/// `|b| > tol`. Zero if some cell carries both; infinite if either support
/// is empty.
pub fn support_distance(a: &ScalarField, b: &ScalarField, tol: f64) -> f64 {
    let grid = a.grid();
    assert_eq!(grid, b.grid(), "fields on different grids");
    let (ma, ba) = support_cells(a, tol);
    let (mb, bb) = support_cells(b, tol);
    if ma.iter().zip(&mb).any(|(&x, &y)| x && y) {
        return 0.0;
    }
    nearest_pair(grid, &ba, &bb)
}

/// Smallest periodic distance between a cell of `a` and a cell of `b`,
/// searching `b` through square buckets in rings of growing radius.
fn nearest_pair(grid: Grid, a: &[usize], b: &[usize]) -> f64 {
    const SIDE: usize = 8;
    let n = grid.n();
    let nb = n.div_ceil(SIDE);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];
    for &j in b {
        buckets[(j / n / SIDE) * nb + (j % n) / SIDE].push(j);
    }
    let bucket_width = SIDE as f64 * grid.dx();
    let mut best = f64::INFINITY;
    for &i in a {
        let p = grid.point(i);
        let (c1, c2) = ((i / n / SIDE) as i64, ((i % n) / SIDE) as i64);
        let mut local = f64::INFINITY;
        for ring in 0..=(nb as i64 / 2 + 1) {
            // every cell in ring r is at least (r - 1) bucket widths away
            if (ring - 1).max(0) as f64 * bucket_width >= local.min(best) {
                break;
            }
            for d1 in -ring..=ring {
                for d2 in -ring..=ring {
                    if d1.abs().max(d2.abs()) != ring {
                        continue;
                    }
                    let k1 = (c1 + d1).rem_euclid(nb as i64) as usize;
                    let k2 = (c2 + d2).rem_euclid(nb as i64) as usize;
                    for &j in &buckets[k1 * nb + k2] {
                        let d = grid.periodic_delta(p, grid.point(j));
                        local = local.min(d[0].hypot(d[1]));
                    }
                }
            }
            if 2 * ring + 1 >= nb as i64 {
                break;
            }
        }
        best = best.min(local);
    }
    best
}

/// Largest distance from the origin of a cell where `|f| > tol`.
pub fn support_radius(f: &ScalarField, tol: f64) -> f64 {
    let grid = f.grid();
    f.samples()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(i, _)| {
            let p = grid.point(i);
            p[0].hypot(p[1])
        })
        .fold(0.0, f64::max)
}

/// Far-field dipole placed outside the main vorticity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RemainderBlob {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    /// Measured grid distance between the supports.
    pub distance: f64,
    pub l1: f64,
    pub lp: f64,
}

/// Places a dipole at distance at least `remainder.distance` from the
/// support of `f` and scales it so `||g||_1 + ||g||_p` equals the budget.
pub fn build_remainder(
    sc: &VorticityScenario,
    f: &ScalarField,
) -> Result<(ScalarField, RemainderBlob)> {
    let spec = sc.remainder;
    let grid = sc.grid;
    if !(spec.distance > 0.0 && spec.distance.is_finite()) {
        return Err(Error::invalid("remainder distance must be positive"));
    }
    if !(spec.p > 2.0 && spec.p.is_finite()) {
        return Err(Error::invalid(format!("remainder p must exceed 2, got {}", spec.p)));
    }
    if !(spec.budget > 0.0 && spec.budget <= 1.0) {
        return Err(Error::invalid("remainder budget must lie in (0, 1]"));
    }
    if spec.radius < 8.0 * grid.dx() {
        return Err(Error::invalid(format!(
            "remainder radius {} is below 8 grid cells",
            spec.radius
        )));
    }
    let r_f = support_radius(f, 0.0);
    let reach = r_f + spec.distance + spec.radius;
    let (sin, cos) = spec.direction.sin_cos();
    // snap away from the origin so the gap can only grow
    let dx = grid.dx();
    let outward = |x: f64| {
        let hw = grid.half_width();
        let i = ((x + hw) / dx).round();
        let snapped = -hw + i * dx;
        if snapped.abs() < x.abs() {
            snapped + dx * x.signum()
        } else {
            snapped
        }
    };
    let target = [outward(reach * cos), outward(reach * sin)];
    let margin = 0.75 * grid.half_width();
    if target.iter().any(|c| c.abs() + spec.radius > margin) {
        return Err(Error::invalid(format!(
            "remainder at distance {} does not fit: centre {:?} plus radius {} exceeds 3L/4 = {}",
            spec.distance, target, spec.radius, margin
        )));
    }
    let (unit, center) = dipole_bump(grid, target, spec.radius, [1.0, 0.0]);
    let l1 = unit.lp_integral(1.0);
    let lp = unit.lp_integral(spec.p).powf(1.0 / spec.p);
    let amplitude = spec.budget / (l1 + lp);
    let g = unit.scale(amplitude);
    let distance = support_distance(f, &g, 0.0);
    if distance < spec.distance {
        return Err(Error::invalid(format!(
            "remainder support distance {distance} is below the requested {}",
            spec.distance
        )));
    }
    Ok((
        g,
        RemainderBlob {
            center,
            radius: spec.radius,
            amplitude,
            distance,
            l1: amplitude * l1,
            lp: amplitude * lp,
        },
    ))
}

/// Smooth symmetry-breaking perturbation whose velocity has
/// `||v_0||_{H^s} = eps`.
pub fn build_perturbation(sc: &VorticityScenario) -> Result<ScalarField> {
    let spec = sc.perturbation;
    let grid = sc.grid;
    if spec.eps == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    if !(spec.s > 2.0) {
        return Err(Error::invalid(format!("perturbation s must exceed 2, got {}", spec.s)));
    }
    if spec.radius < 8.0 * grid.dx() {
        return Err(Error::invalid(format!(
            "perturbation radius {} is below 8 grid cells",
            spec.radius
        )));
    }
    let (shape, _) = dipole_bump(grid, spec.center, spec.radius, [1.0, 0.5]);
    let norm = velocity_sobolev_norm(&shape, spec.s);
    Ok(shape.scale(spec.eps / norm))
}

/// Every labelled part of an initial condition.
#[derive(Debug, Clone)]
pub struct InitialComponents {
    pub large: ScalarField,
    pub small: ScalarField,
    pub perturbation: ScalarField,
    pub remainder: Option<(ScalarField, RemainderBlob)>,
    /// Sign applied to the small-scale vortex.
    pub small_sign: f64,
}

impl InitialComponents {
    /// `f = omega^L + omega^S + omega^P`.
    pub fn union(&self) -> ScalarField {
        self.large.add(&self.small).add(&self.perturbation)
    }

    pub fn total(&self) -> ScalarField {
        let f = self.union();
        match &self.remainder {
            Some((g, _)) => f.add(g),
            None => f,
        }
    }
}

/// Builds all components, resolving the small-scale sign.
pub fn build_components(sc: &VorticityScenario) -> Result<InitialComponents> {
    let large = build_large_scale(sc)?;
    let small_unit = if sc.small_amplitude > 0.0 {
        build_small_scale(sc)?
    } else {
        ScalarField::zeros(sc.grid)
    };
    let small_sign = match sc.small_sign {
        SignChoice::Plus => 1.0,
        SignChoice::Minus => -1.0,
        SignChoice::Auto => {
            choose_small_scale_sign(&biot_savart(&large)?, &biot_savart(&small_unit)?)
        }
    };
    let small = if small_sign < 0.0 {
        small_unit.scale(-1.0)
    } else {
        small_unit
    };
    let perturbation = build_perturbation(sc)?;
    let mut out = InitialComponents {
        large,
        small,
        perturbation,
        remainder: None,
        small_sign,
    };
    if sc.remainder.distance > 0.0 {
        out.remainder = Some(build_remainder(sc, &out.union())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scenario() -> VorticityScenario {
        VorticityScenario::default()
    }

    #[test]
    fn large_scale_plateau_and_oddness() {
        let sc = scenario();
        let v = LargeScaleVortex::new(&sc).unwrap();
        let r = sc.big_n.powf(-0.75);
        let x = [r * (PI / 4.0).cos(), r * (PI / 4.0).sin()];
        assert_eq!(v.eval(x), 1.0);
        assert_eq!(v.eval([-x[0], x[1]]), -1.0);
        assert_eq!(v.eval([x[0], -x[1]]), -1.0);

        let w = build_large_scale(&sc).unwrap();
        assert!(w.sup() <= 1.0);
        assert!(w.mean().abs() <= 1e-12);
        assert_eq!(w.odd_asymmetry(), 0.0);
        assert_eq!(w.add(&w.reflect_x2()).sup(), 0.0);
    }

    #[test]
    fn large_scale_support_in_annulus_and_cones() {
        let sc = scenario();
        let w = build_large_scale(&sc).unwrap();
        let grid = sc.grid;
        let (lo, hi) = (0.5 / sc.big_n, 2.0 / sc.big_n.sqrt());
        for (i, &v) in w.samples().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let p = grid.point(i);
            let r = p[0].hypot(p[1]);
            let th = p[1].abs().atan2(p[0].abs());
            assert!(r >= lo - 1e-12 && r <= hi + 1e-12, "r = {r}");
            assert!(th >= PI / 6.0 - 1e-12 && th <= 5.0 * PI / 12.0 + 1e-12);
        }
    }

    #[test]
    fn large_scale_rejects_under_resolution() {
        let sc = scenario().with_grid(Grid::new(256, PI).unwrap());
        assert!(build_large_scale(&sc).is_err());
    }

    #[test]
    fn small_scale_geometry() {
        let sc = scenario();
        let tube = SmallScaleTube::new(&sc, 1.0);
        let h = (tube.h0 * tube.h1).sqrt();
        assert_eq!(tube.eval([h, h]), 1.0);
        let r = 1.5 / sc.big_n;
        for k in 0..64 {
            let th = k as f64 * 2.0 * PI / 64.0;
            assert_eq!(tube.eval([r * th.cos(), r * th.sin()]), 0.0);
        }
        let s = build_small_scale(&sc).unwrap();
        let l = build_large_scale(&sc).unwrap();
        assert_eq!(s.zip_with(&l, |a, b| a * b).sup(), 0.0);
        assert!(s.sup() <= 1.0);
        assert_eq!(s.odd_asymmetry(), 0.0);
        assert!(support_radius(&s, 0.0) < 1.0 / sc.big_n);
    }

    #[test]
    fn small_scale_rejects_infeasible_segment() {
        let mut sc = scenario();
        sc.k_exp = 2.0;
        assert!(build_small_scale(&sc).is_err());
        let mut sc = scenario();
        sc.n_small = 12.0;
        assert!(build_small_scale(&sc).is_err());
    }

    #[test]
    fn sign_choice() {
        let sc = scenario().with_grid(Grid::new(512, PI / 2.0).unwrap());
        let ul = biot_savart(&build_large_scale(&sc).unwrap()).unwrap();
        assert_eq!(choose_small_scale_sign(&ul, &ul), 1.0);
        assert_eq!(choose_small_scale_sign(&ul, &ul.scale(-1.0)), -1.0);

        let us = biot_savart(&build_small_scale(&sc).unwrap()).unwrap();
        let s = choose_small_scale_sign(&ul, &us);
        let cross: f64 = ul
            .u1
            .samples()
            .iter()
            .zip(us.u1.samples())
            .chain(ul.u2.samples().iter().zip(us.u2.samples()))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * sc.grid.cell_area();
        assert!(s * cross >= 0.0);
    }

    #[test]
    fn bucketed_distance_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let grid = Grid::new(64, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a: Vec<usize> = (0..rng.gen_range(1..40)).map(|_| rng.gen_range(0..grid.len())).collect();
            let b: Vec<usize> = (0..rng.gen_range(1..40)).map(|_| rng.gen_range(0..grid.len())).collect();
            let mut want = f64::INFINITY;
            for &i in &a {
                for &j in &b {
                    let d = grid.periodic_delta(grid.point(i), grid.point(j));
                    want = want.min(d[0].hypot(d[1]));
                }
            }
            assert_eq!(nearest_pair(grid, &a, &b), want);
        }
    }

    #[test]
    fn remainder_constraints() {
        let mut sc = scenario().with_grid(Grid::new(512, PI).unwrap());
        sc.big_n = 4.0;
        sc.small_amplitude = 0.0;
        sc.remainder.distance = PI / 4.0;
        let f = build_large_scale(&sc).unwrap();
        let (g, blob) = build_remainder(&sc, &f).unwrap();
        assert!(support_distance(&f, &g, 0.0) >= sc.remainder.distance);
        let l1 = g.lp_integral(1.0);
        let l4 = g.lp_integral(4.0).powf(0.25);
        assert!(l1 + l4 <= 1.0);
        assert!((l1 + l4 - sc.remainder.budget).abs() < 1e-12);
        assert!(g.integral().abs() <= 1e-12);
        assert!(blob.distance >= sc.remainder.distance);

        sc.remainder.distance = 2.0;
        assert!(build_remainder(&sc, &f).is_err());
    }

    #[test]
    fn perturbation_scaling() {
        let mut sc = scenario().with_grid(Grid::new(128, PI).unwrap());
        sc.perturbation.radius = 0.4;
        assert_eq!(build_perturbation(&sc).unwrap().sup(), 0.0);
        sc.perturbation.eps = 1e-3;
        let p = build_perturbation(&sc).unwrap();
        let measured = velocity_sobolev_norm(&p, sc.perturbation.s);
        assert!((measured / 1e-3 - 1.0).abs() <= 1e-8);
        assert!(p.integral().abs() <= 1e-15);
        sc.perturbation.eps = 2e-3;
        let q = build_perturbation(&sc).unwrap();
        assert!(q.sub(&p.scale(2.0)).sup() <= 1e-14 * q.sup());
        sc.perturbation.s = 2.0;
        assert!(build_perturbation(&sc).is_err());
    }

    #[test]
    fn support_distance_of_boxes() {
        let grid = Grid::new(64, PI).unwrap();
        let dx = grid.dx();
        let a = ScalarField::from_fn(grid, |x| f64::from(x[0].abs() < 0.5 && x[1].abs() < 0.5));
        let b = ScalarField::from_fn(grid, |x| f64::from((x[0] - 2.0).abs() < 0.5 && x[1].abs() < 0.5));
        let d = support_distance(&a, &b, 0.0);
        assert!(d >= 1.0 - 2.0 * dx && d <= 1.0 + 2.0 * dx, "{d}");
        assert_eq!(support_distance(&a, &a, 0.0), 0.0);
        assert!(support_distance(&a, &ScalarField::zeros(grid), 0.0).is_infinite());
    }

    #[test]
    fn components_union_is_mean_zero() {
        let sc = scenario();
        let c = build_components(&sc).unwrap();
        assert!(c.union().integral().abs() <= 1e-10);
        let ul = biot_savart(&c.large).unwrap();
        let us = biot_savart(&c.small).unwrap();
        assert!(ul.inner(&us) >= 0.0);
    }
}
