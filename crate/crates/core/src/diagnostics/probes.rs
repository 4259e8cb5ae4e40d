use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolution::{DiagnosticsFrame, EulerState, RunConfig, RunObserver, Simulation};
use crate::initcond::{build_components, support_distance, ComponentLabel, VorticityScenario};
use crate::lagrangian::{seed_standard_sets, Mat2, SeedConfig, TracerSet};
use crate::spectral::{biot_savart, sobolev_norm, velocity_gradient, Grid, ScalarField, VectorField};
use crate::{Error, Result};

/// Support threshold relative to a field's sup, used to decide which cells
/// carry a transported component once spectral tails are present.
pub const SUPPORT_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub run: RunConfig,
    pub seeds: SeedConfig,
    /// Direction `T` of the stretch comparison.
    pub direction: [f64; 2],
    /// Member runs executed concurrently.
    pub jobs: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            run: RunConfig::default(),
            seeds: SeedConfig::default(),
            direction: [s, s],
            jobs: 1,
        }
    }
}

/// `sup |grad u|` over the grid, Frobenius norm per node.
fn sup_gradient(u: &VectorField) -> f64 {
    let g = velocity_gradient(u);
    let n = g[0][0].samples().len();
    (0..n).fold(0.0f64, |m, i| {
        let mut s = 0.0;
        for r in &g {
            for c in r {
                let v = c.samples()[i];
                s += v * v;
            }
        }
        m.max(s.sqrt())
    })
}

fn sum_labels(state: &EulerState, labels: &[ComponentLabel]) -> ScalarField {
    let mut out = ScalarField::zeros(state.omega().grid());
    for l in labels {
        if let Some(f) = state.label(*l) {
            out = out.add(f);
        }
    }
    out
}

const F_LABELS: [ComponentLabel; 3] = [
    ComponentLabel::Large,
    ComponentLabel::Small,
    ComponentLabel::Perturbation,
];

/// Periodic gap between the cells where two labels exceed
/// [`SUPPORT_FRACTION`] of their initial sups.
pub fn labelled_support_gap(a: &ScalarField, a_sup0: f64, b: &ScalarField, b_sup0: f64) -> f64 {
    let ta = a.map(|v| if v.abs() > SUPPORT_FRACTION * a_sup0 { v } else { 0.0 });
    let tb = b.map(|v| if v.abs() > SUPPORT_FRACTION * b_sup0 { v } else { 0.0 });
    support_distance(&ta, &tb, 0.0)
}

struct Capture {
    t: f64,
    omega: ScalarField,
    f_part: ScalarField,
    g_part: Option<ScalarField>,
    jac: Vec<Mat2>,
    sup_u: f64,
}

struct Recorder {
    frames: Vec<Capture>,
}

impl RunObserver for Recorder {
    fn frame(&mut self, sim: &Simulation, _frame: &DiagnosticsFrame) -> Result<()> {
        let st = sim.state();
        self.frames.push(Capture {
            t: st.time(),
            omega: st.omega().clone(),
            f_part: sum_labels(st, &F_LABELS),
            g_part: st.label(ComponentLabel::Remainder).cloned(),
            jac: sim
                .tracers()
                .map(|s| s.iter().map(|t| t.j).collect())
                .unwrap_or_default(),
            sup_u: st.velocity().sup(),
        });
        Ok(())
    }
}

fn capture_run(sc: &VorticityScenario, cfg: &ProbeConfig, tracers: bool) -> Result<Vec<Capture>> {
    let comps = build_components(sc)?;
    let state = EulerState::from_components(&comps)?;
    let set: Option<TracerSet> = if tracers {
        Some(seed_standard_sets(sc, &cfg.seeds)?)
    } else {
        None
    };
    let mut sim = Simulation::new(state, cfg.run.clone(), set)?;
    let mut rec = Recorder { frames: Vec::new() };
    sim.run(&mut rec, None)?;
    Ok(rec.frames)
}

fn run_members<T, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<Vec<Capture>>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Capture>> + Sync + Send,
{
    if jobs <= 1 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityFrame {
    pub t: f64,
    /// `max |T^T J T (base) - T^T J T (perturbed)|` over tracers.
    pub stretch_diff: f64,
    /// `max |J (base) - J (perturbed)|` (Frobenius) over tracers.
    pub jacobian_diff: f64,
    /// `(sup ||v||_inf + sup ||grad v||_inf) exp(sup ||grad u||_inf)` with
    /// sups over output times up to `t`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub eps: f64,
    /// Sup over output times of `stretch_diff`.
    pub stretch_diff: f64,
    pub jacobian_diff: f64,
    pub frames: Vec<StabilityFrame>,
}

impl StabilityRow {
    pub fn within_bound(&self) -> bool {
        self.frames.iter().all(|f| f.jacobian_diff <= f.bound)
    }
}

/// Runs the scenario without perturbation and with each `eps` in
/// `eps_list`, tracking the standard tracer sets in all runs.
pub fn perturbation_stability_probe(
    scenario: &VorticityScenario,
    eps_list: &[f64],
    cfg: &ProbeConfig,
) -> Result<Vec<StabilityRow>> {
    let t = cfg.direction;
    if ((t[0].hypot(t[1])) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("probe direction must be a unit vector"));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::invalid("perturbation sizes must be non-negative"));
    }
    let mut members = vec![0.0];
    members.extend_from_slice(eps_list);
    let runs = run_members(cfg.jobs, &members, |&eps| {
        let mut sc = scenario.clone();
        sc.perturbation.eps = eps;
        capture_run(&sc, cfg, true)
    })?;
    let base = &runs[0];
    let stretch = |j: &Mat2| {
        t[0] * (j[0][0] * t[0] + j[0][1] * t[1]) + t[1] * (j[1][0] * t[0] + j[1][1] * t[1])
    };
    let base_u: Vec<VectorField> = base
        .iter()
        .map(|c| biot_savart(&c.omega))
        .collect::<Result<_>>()?;
    let base_grad: Vec<f64> = base_u.iter().map(sup_gradient).collect();

    let mut rows = Vec::new();
    for (eps, run) in eps_list.iter().zip(&runs[1..]) {
        let mut frames = Vec::new();
        let (mut sv, mut sgv, mut sgu) = (0.0f64, 0.0f64, 0.0f64);
        let (mut ds, mut dj) = (0.0f64, 0.0f64);
        for (k, (b, p)) in base.iter().zip(run).enumerate() {
            let v = biot_savart(&p.omega.sub(&b.omega))?;
            sv = sv.max(v.sup());
            sgv = sgv.max(sup_gradient(&v));
            sgu = sgu.max(base_grad[k]);
            let mut fs = 0.0f64;
            let mut fj = 0.0f64;
            for (jb, jp) in b.jac.iter().zip(&p.jac) {
                fs = fs.max((stretch(jb) - stretch(jp)).abs());
                let mut s = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        s += (jb[r][c] - jp[r][c]).powi(2);
                    }
                }
                fj = fj.max(s.sqrt());
            }
            ds = ds.max(fs);
            dj = dj.max(fj);
            frames.push(StabilityFrame {
                t: b.t,
                stretch_diff: fs,
                jacobian_diff: fj,
                bound: (sv + sgv) * sgu.exp(),
            });
        }
        rows.push(StabilityRow {
            eps: *eps,
            stretch_diff: ds,
            jacobian_diff: dj,
            frames,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluingFrame {
    pub t: f64,
    /// `||omega_f^{f+g}(t) - omega_f(t)||_{H^1}` using the co-transported
    /// f-labels of the glued run.
    pub distance_s1: f64,
    pub distance_s2: f64,
    /// Same with `chi_D omega^{f+g}` in place of the labels.
    pub chi_distance_s1: f64,
    /// Gap between the f-labels and the remainder label.
    pub support_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GluingRow {
    pub distance: f64,
    /// `sup_t distance_s1`.
    pub sup_distance: f64,
    pub sup_chi_distance: f64,
    /// Measured `sup |u|` over the glued run.
    pub beta: f64,
    pub disjoint: bool,
    pub frames: Vec<GluingFrame>,
}

/// Cells within `radius` of the thresholded support of `f`.
fn dilated_support(f: &ScalarField, tol: f64, radius: f64) -> Vec<bool> {
    let grid: Grid = f.grid();
    let n = grid.n() as i64;
    let mask: Vec<bool> = f.samples().iter().map(|v| v.abs() > tol).collect();
    let reach = (radius / grid.dx()).floor() as i64;
    let mut offsets = Vec::new();
    for a in -reach..=reach {
        for b in -reach..=reach {
            if ((a * a + b * b) as f64).sqrt() * grid.dx() < radius {
                offsets.push((a, b));
            }
        }
    }
    let mut out = mask.clone();
    let at = |i: i64, j: i64| (i.rem_euclid(n) * n + j.rem_euclid(n)) as usize;
    for i in 0..n {
        for j in 0..n {
            if !mask[(i * n + j) as usize] {
                continue;
            }
            let interior = mask[at(i + 1, j)] && mask[at(i - 1, j)] && mask[at(i, j + 1)] && mask[at(i, j - 1)];
            if interior {
                continue;
            }
            for &(a, b) in &offsets {
                out[at(i + a, j + b)] = true;
            }
        }
    }
    out
}

/// Runs the scenario without remainder and with a remainder at each
/// distance in `distances`, comparing the f-part of the glued runs with the
/// f-only run.
pub fn remainder_gluing_probe(
    scenario: &VorticityScenario,
    distances: &[f64],
    cfg: &ProbeConfig,
) -> Result<Vec<GluingRow>> {
    if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::invalid("remainder distances must be non-negative"));
    }
    let mut members = vec![0.0];
    members.extend_from_slice(distances);
    let runs = run_members(cfg.jobs, &members, |&d| {
        let mut sc = scenario.clone();
        sc.remainder.distance = d;
        capture_run(&sc, cfg, false)
    })?;
    let base = &runs[0];
    let mut rows = Vec::new();
    for (d, run) in distances.iter().zip(&runs[1..]) {
        let beta = run.iter().fold(0.0f64, |m, c| m.max(c.sup_u));
        let f_sup0 = run[0].f_part.sup();
        let g_sup0 = run[0].g_part.as_ref().map_or(0.0, |g| g.sup());
        let mut frames = Vec::new();
        let mut disjoint = true;
        for (b, p) in base.iter().zip(run) {
            let diff = p.f_part.sub(&b.omega);
            let mask = dilated_support(&p.f_part, SUPPORT_FRACTION * f_sup0, beta);
            let chi = ScalarField::from_samples(
                p.omega.grid(),
                p.omega
                    .samples()
                    .iter()
                    .zip(&mask)
                    .map(|(v, &keep)| if keep { *v } else { 0.0 })
                    .collect(),
            )?;
            let gap = match &p.g_part {
                Some(g) => labelled_support_gap(&p.f_part, f_sup0, g, g_sup0),
                None => f64::INFINITY,
            };
            disjoint &= gap > 0.0;
            frames.push(GluingFrame {
                t: b.t,
                distance_s1: sobolev_norm(&diff, 1.0),
                distance_s2: sobolev_norm(&diff, 2.0),
                chi_distance_s1: sobolev_norm(&chi.sub(&b.omega), 1.0),
                support_gap: gap,
            });
        }
        rows.push(GluingRow {
            distance: *d,
            sup_distance: frames.iter().fold(0.0, |m, f| m.max(f.distance_s1)),
            sup_chi_distance: frames.iter().fold(0.0, |m, f| m.max(f.chi_distance_s1)),
            beta,
            disjoint,
            frames,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_scenario() -> VorticityScenario {
        let mut sc = VorticityScenario::default();
        sc.big_n = 4.0;
        sc.n_small = 32.0;
        sc.grid = Grid::new(512, PI).unwrap();
        sc.perturbation.radius = 0.15;
        sc
    }

    fn quick() -> ProbeConfig {
        ProbeConfig {
            run: RunConfig {
                t_end: 0.05,
                output_every: 0.025,
                checkpoint_every: 0.0,
                ..RunConfig::default()
            },
            seeds: SeedConfig {
                shells: 8,
                per_shell: 32,
                cone_points: 4,
                line_points: 4,
            },
            ..ProbeConfig::default()
        }
    }

    #[test]
    fn zero_perturbation_is_bitwise_identical() {
        let rows = perturbation_stability_probe(&small_scenario(), &[0.0], &quick()).unwrap();
        assert_eq!(rows[0].stretch_diff, 0.0);
        assert_eq!(rows[0].jacobian_diff, 0.0);
    }

    #[test]
    fn zero_remainder_matches_f_only() {
        let mut sc = small_scenario();
        sc.remainder.budget = 0.5;
        let rows = remainder_gluing_probe(&sc, &[0.0], &quick()).unwrap();
        assert!(rows[0].sup_distance <= 1e-10);
    }

    #[test]
    fn dilation_grows_support() {
        let g = Grid::new(64, PI).unwrap();
        let f = ScalarField::from_fn(g, |x| f64::from(x[0].abs() < 0.3 && x[1].abs() < 0.3));
        let m0 = dilated_support(&f, 0.5, 1e-9).iter().filter(|&&b| b).count();
        let m1 = dilated_support(&f, 0.5, 0.5).iter().filter(|&&b| b).count();
        assert!(m1 > m0);
    }
}
