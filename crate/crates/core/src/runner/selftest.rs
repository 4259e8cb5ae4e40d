//! Quick self-consistency checks run by the `selftest` mode.

use std::f64::consts::PI;

use crate::diagnostics::{
    angular_measure, annulus_radii, classify_case, energy_transfer_check, kernel_registry,
    prescribed_thinning_energy, scale_energy_split, zlatos_q, zlatos_residual, Case, DEFAULT_DTHETA,
};
use crate::evolution::{cfl_dt, project, rhs, run, RunConfig};
use crate::initcond::bump::angular_profile;
use crate::initcond::{build_large_scale, build_small_scale, VorticityScenario};
use crate::lagrangian::{
    advect_tracers, seed_standard_sets, thinning_scan, AnalyticFlow, SeedConfig, Tracer, TracerLabel,
    TracerSet, VelocityEval,
};
use crate::spectral::{biot_savart, snapshot, velocity_inner, Grid, ScalarField, VectorField};
use crate::Result;

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

/// Small scenario that satisfies every builder constraint on a 256^2 grid.
pub fn small_scenario() -> VorticityScenario {
    let mut sc = VorticityScenario::default();
    sc.big_n = 4.0;
    sc.n_small = 32.0;
    sc.grid = Grid::new(256, 1.5).expect("valid grid");
    sc
}

fn biot_savart_single_mode() -> Result<(bool, String)> {
    let g = Grid::new(32, PI)?;
    let u = biot_savart(&ScalarField::from_fn(g, |x| x[0].sin()))?;
    let want = VectorField::from_fn(g, |x| [0.0, -x[0].cos()]);
    let err = u.u1.sub(&want.u1).sup().max(u.u2.sub(&want.u2).sup());
    Ok((err <= 1e-12, format!("max error {err:.2e}")))
}

fn steady_taylor_green() -> Result<(bool, String)> {
    let g = Grid::new(64, PI)?;
    let r = rhs(&ScalarField::from_fn(g, |x| 2.0 * x[0].sin() * x[1].sin()))?;
    Ok((r.sup() <= 1e-10, format!("sup|rhs| {:.2e}", r.sup())))
}

fn odd_odd_parity() -> Result<(bool, String)> {
    let g = Grid::new(64, PI)?;
    let w = ScalarField::from_fn(g, |x| {
        x[0].sin() * x[1].sin() + 0.5 * (2.0 * x[0]).sin() * (3.0 * x[1]).sin() + 0.3 * x[0].sin() * (2.0 * x[1]).sin()
    });
    let r = rhs(&w)?;
    let asym = r.odd_asymmetry() / r.l2_physical().max(f64::MIN_POSITIVE);
    Ok((asym <= 1e-12, format!("relative asymmetry {asym:.2e}")))
}

fn cfl_floor() -> Result<(bool, String)> {
    let g = Grid::new(32, PI)?;
    let dt = cfl_dt(&VectorField::zeros(g), g, 0.5);
    Ok((dt.is_finite() && dt > 0.0, format!("dt {dt:.3e}")))
}

fn zero_length_run() -> Result<(bool, String)> {
    let cfg = RunConfig {
        t_end: 0.0,
        ..RunConfig::default()
    };
    let rec = run(&small_scenario(), &cfg)?;
    Ok((rec.frames.len() == 1 && rec.steps == 0, format!("{} frame(s)", rec.frames.len())))
}

fn angular_plateau() -> Result<(bool, String)> {
    let psi = angular_profile();
    let inside = [PI / 5.0, 9.0 * PI / 24.0, PI / 4.0, PI / 3.0]
        .iter()
        .all(|&t| psi.eval(t) >= 0.5 - 1e-12);
    let outside = [PI / 6.0 - 1e-3, 5.0 * PI / 12.0 + 1e-3].iter().all(|&t| psi.eval(t) == 0.0);
    let plateau = psi.eval(PI / 4.0) == 1.0 && psi.eval(PI / 3.0) == 1.0;
    Ok((inside && outside && plateau, String::new()))
}

fn large_scale_support() -> Result<(bool, String)> {
    let sc = small_scenario();
    let f = build_large_scale(&sc)?;
    let (lo, hi) = (0.5 / sc.big_n, 2.0 / sc.big_n.sqrt());
    let mut bad = 0;
    for (k, &v) in f.samples().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let x = sc.grid.point(k);
        let r = x[0].hypot(x[1]);
        let th = x[1].abs().atan2(x[0].abs());
        if r < lo || r > hi || th < PI / 6.0 || th > 5.0 * PI / 12.0 {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} cell(s) outside the sector annulus")))
}

fn angular_measure_at_start() -> Result<(bool, String)> {
    let sc = small_scenario();
    let set = seed_standard_sets(&sc, &SeedConfig::default())?;
    let (lo, hi) = sc.annulus();
    let samples = angular_measure(&set, &annulus_radii(lo, hi, 32), DEFAULT_DTHETA, sc.grid.dx())?;
    let floor = 7.0 * PI / 40.0 - DEFAULT_DTHETA;
    let min = samples.iter().fold(f64::INFINITY, |m, s| m.min(s.measure));
    let verdict = classify_case(&samples, sc.m_threshold)?;
    Ok((
        min >= floor && verdict.case == Case::Two,
        format!("min measure {min:.4} (floor {floor:.4}), case {}", verdict.case.as_str()),
    ))
}

fn prescribed_identity_and_decay() -> Result<(bool, String)> {
    let sc = small_scenario();
    let w = project(&build_small_scale(&sc)?);
    let e1 = prescribed_thinning_energy(&w, 1.0, 1.0)?;
    let direct = velocity_inner(&w, &w);
    let rel = (e1.energy - direct).abs() / direct;
    let mut prev = e1.energy;
    let mut ok = rel <= 1e-12 && e1.pass;
    for k in 1..=10 {
        let row = prescribed_thinning_energy(&w, f64::from(1u32 << k), 1.0)?;
        ok &= row.pass && row.energy <= prev;
        prev = row.energy;
    }
    Ok((ok, format!("Mt = 1 mismatch {rel:.2e}, energy(1024)/energy(1) {:.2e}", prev / e1.energy)))
}

fn zlatos_trivial() -> Result<(bool, String)> {
    let g = Grid::new(64, PI)?;
    let zero = ScalarField::zeros(g);
    let reg = kernel_registry();
    let k = reg.get("quartic")?;
    let q = zlatos_q(&zero, [0.3, 0.3], k)?;
    let r = zlatos_residual(&zero, &VectorField::zeros(g), [0.3, 0.3], 1, k)?;
    let bound_ok = (r.bound - (1.0 + 2f64.ln())).abs() <= 1e-15;
    let rejects = zlatos_q(&zero, [-0.1, 0.3], k).is_err();
    Ok((q == 0.0 && r.b == 0.0 && bound_ok && rejects, String::new()))
}

fn energy_split_bilinear() -> Result<(bool, String)> {
    let sc = small_scenario();
    let l = project(&build_large_scale(&sc)?);
    let s = project(&build_small_scale(&sc)?);
    let split = scale_energy_split(&l, &s);
    let total = velocity_inner(&l.add(&s), &l.add(&s));
    let rel = (split.total() - total).abs() / total;
    let cs = split.cross.abs() <= (split.energy_l * split.energy_s).sqrt();
    let single = energy_transfer_check(0.0, &scale_energy_split(&l, &ScalarField::zeros(sc.grid)), &scale_energy_split(&l, &ScalarField::zeros(sc.grid)));
    Ok((rel <= 1e-10 && cs && single.pass, format!("bilinearity error {rel:.2e}")))
}

fn linear_strain() -> Result<(bool, String)> {
    let flow = AnalyticFlow(|x: [f64; 2]| ([x[0], -x[1]], [[1.0, 0.0], [0.0, -1.0]]));
    let mut tr = vec![Tracer::new([0.1, 0.2], TracerLabel::Custom)];
    let steps = 100;
    let stages: [&dyn VelocityEval; 4] = [&flow, &flow, &flow, &flow];
    for _ in 0..steps {
        advect_tracers(&mut tr, stages, 1.0 / steps as f64);
    }
    let j = tr[0].j;
    let e = 1f64.exp();
    let err = (j[0][0] - e).abs().max((j[1][1] - 1.0 / e).abs()).max(j[0][1].abs()).max(j[1][0].abs());
    Ok((err <= 1e-6, format!("max error {err:.2e}")))
}

fn thinning_threshold() -> Result<(bool, String)> {
    let m: f64 = 2.0;
    let flow = AnalyticFlow(|x: [f64; 2]| ([x[0], -x[1]], [[1.0, 0.0], [0.0, -1.0]]));
    let stages: [&dyn VelocityEval; 4] = [&flow, &flow, &flow, &flow];
    let mut set = TracerSet::new(vec![Tracer::new([0.0, 0.0], TracerLabel::Custom)]);
    let dt = 0.01;
    let mut t = 0.0;
    let mut fired = None;
    for k in 1..=200 {
        advect_tracers(&mut set.tracers, stages, dt);
        t = k as f64 * dt;
        if !thinning_scan(&set, t, [1.0, 0.0], m)?.events.is_empty() {
            fired = Some(t);
            break;
        }
    }
    let ok = fired.is_some_and(|f| f >= m.ln() && f - m.ln() <= dt + 1e-12);
    Ok((ok, format!("fired at t = {t:.2} (ln M = {:.4})", m.ln())))
}

fn snapshot_round_trip() -> Result<(bool, String)> {
    let g = Grid::new(16, 1.25)?;
    let f = ScalarField::from_fn(g, |x| (x[0] * 3.1).sin() * x[1].exp());
    let (back, t) = snapshot::decode(&snapshot::encode(&f, 0.1 + 0.2), std::path::Path::new("<memory>"))?;
    let exact = back.samples().iter().zip(f.samples()).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok((exact && t == 0.1 + 0.2 && back.grid() == g, String::new()))
}

pub const CHECKS: &[(&str, Check)] = &[
    ("biot_savart_single_mode", biot_savart_single_mode),
    ("rhs_steady_taylor_green", steady_taylor_green),
    ("rhs_odd_odd_parity", odd_odd_parity),
    ("cfl_zero_velocity", cfl_floor),
    ("run_t_end_zero", zero_length_run),
    ("angular_profile_plateaus", angular_plateau),
    ("large_scale_support", large_scale_support),
    ("angular_measure_t0", angular_measure_at_start),
    ("prescribed_identity_and_decay", prescribed_identity_and_decay),
    ("zlatos_trivial_cases", zlatos_trivial),
    ("energy_split_bilinearity", energy_split_bilinear),
    ("linear_strain_jacobian", linear_strain),
    ("thinning_fires_at_ln_m", thinning_threshold),
    ("snapshot_round_trip", snapshot_round_trip),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| match f() {
            Ok((pass, detail)) => CheckResult { name, pass, detail },
            Err(e) => CheckResult {
                name,
                pass: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
