//! Study modes, registered by name.

use std::fs;

use super::evolve::{self, Outputs};
use super::rundir::write_atomic;
use super::{selftest, Context, Outcome};
use crate::diagnostics::output::{self, Cell, CsvSink};
use crate::diagnostics::{
    diagonal_sweep, fit_constant, kernel_registry, perturbation_stability_probe, prescribed_thinning_energy,
    remainder_gluing_probe, zlatos_residual,
};
use crate::evolution::{project, EulerState};
use crate::initcond::{build_components, build_small_scale};
use crate::registry::Registry;
use crate::spectral::{biot_savart, snapshot};
use crate::{Error, Result};

pub trait Study: Send + Sync {
    fn describe(&self) -> &'static str;

    fn run(&self, ctx: &mut Context) -> Result<Outcome>;

    /// Time-dependent studies continue from their last checkpoint.
    fn resume(&self, _ctx: &mut Context) -> Result<Outcome> {
        Err(Error::config("this mode does not write checkpoints and cannot be resumed"))
    }
}

struct Evolving {
    about: &'static str,
    outputs: Outputs,
}

impl Study for Evolving {
    fn describe(&self) -> &'static str {
        self.about
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        evolve::start(ctx.dir, ctx.cfg, self.outputs, ctx.opts.halt_at)
    }

    fn resume(&self, ctx: &mut Context) -> Result<Outcome> {
        evolve::resume(ctx.dir, ctx.cfg, self.outputs, ctx.opts.halt_at)
    }
}

fn write_summary(ctx: &Context, v: serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&v).expect("summary serializes");
    write_atomic(&ctx.dir.join("summary.json"), text.as_bytes())
}

fn non_increasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn non_decreasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack))
}

struct Prescribed;

impl Study for Prescribed {
    fn describe(&self) -> &'static str {
        "energy of the prescribed thinning omega_S(Mt x1, x2/(Mt)) over an M grid (no PDE)"
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        let sc = ctx.cfg.scenario()?;
        let omega_s = project(&build_small_scale(&sc)?);
        let t = ctx.cfg.study.prescribed_t;
        let mut sink = CsvSink::create(ctx.dir.path(), output::PRESCRIBED)?;
        let mut energies = Vec::new();
        let mut all_pass = true;
        for &m in &ctx.cfg.study.m_grid {
            let row = prescribed_thinning_energy(&omega_s, m, t)?;
            sink.write_row(&[row.m.into(), row.t.into(), row.energy.into(), row.bound.into(), row.pass.into()])?;
            energies.push(row.energy);
            all_pass &= row.pass;
        }
        sink.flush()?;
        let ratio = energies.last().copied().unwrap_or(f64::NAN) / energies.first().copied().unwrap_or(f64::NAN);
        write_summary(
            ctx,
            serde_json::json!({
                "all_pass": all_pass,
                "monotone": non_increasing(&energies, 0.0),
                "decay_ratio": ratio,
            }),
        )?;
        Ok(Outcome::Finished)
    }
}

struct Zlatos;

impl Study for Zlatos {
    fn describe(&self) -> &'static str {
        "residual B_i of the Zlatos decomposition along a diagonal sweep, per kernel"
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        let (omega, t) = match &ctx.cfg.study.snapshot {
            Some(p) => snapshot::read(p)?,
            None => {
                let sc = ctx.cfg.scenario()?;
                let st = EulerState::from_components(&build_components(&sc)?)?;
                (st.omega().clone(), 0.0)
            }
        };
        let u = biot_savart(&omega)?;
        let reg = kernel_registry();
        let points = diagonal_sweep(omega.grid().half_width());
        let mut sink = CsvSink::create(ctx.dir.path(), output::ZLATOS)?;
        let mut fits = serde_json::Map::new();
        for name in &ctx.cfg.study.kernels {
            let kernel = reg.get(name)?;
            for i in [1u8, 2] {
                let mut rows = Vec::new();
                for &x in &points {
                    let r = zlatos_residual(&omega, &u, x, i, kernel)?;
                    sink.write_row(&[
                        t.into(),
                        r.x[0].into(),
                        r.x[1].into(),
                        Cell::I(i64::from(r.i)),
                        r.u_over_x.into(),
                        r.q.into(),
                        r.b.into(),
                        r.bound.into(),
                        r.exponent.into(),
                    ])?;
                    rows.push(r);
                }
                fits.insert(format!("{name}_i{i}"), fit_constant(&rows).into());
            }
        }
        sink.flush()?;
        write_summary(ctx, serde_json::json!({ "t": t, "fitted_constant": fits }))?;
        Ok(Outcome::Finished)
    }
}

struct Stability;

impl Study for Stability {
    fn describe(&self) -> &'static str {
        "deformation-gradient differences between base and perturbed runs over an eps sweep"
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        let sc = ctx.cfg.scenario()?;
        let rows = perturbation_stability_probe(&sc, &ctx.cfg.study.eps_list, &ctx.cfg.probe(ctx.opts.jobs))?;
        let mut sink = CsvSink::create(ctx.dir.path(), output::STABILITY)?;
        for r in &rows {
            for f in &r.frames {
                sink.write_row(&[
                    r.eps.into(),
                    f.t.into(),
                    f.stretch_diff.into(),
                    f.jacobian_diff.into(),
                    f.bound.into(),
                    (f.jacobian_diff <= f.bound).into(),
                ])?;
            }
        }
        sink.flush()?;
        let diffs: Vec<f64> = rows.iter().map(|r| r.stretch_diff).collect();
        write_summary(
            ctx,
            serde_json::json!({
                "eps": rows.iter().map(|r| r.eps).collect::<Vec<_>>(),
                "stretch_diff": diffs,
                "monotone": non_decreasing(&diffs, 0.1),
                "within_bound": rows.iter().all(|r| r.within_bound()),
            }),
        )?;
        Ok(Outcome::Finished)
    }
}

struct Gluing;

impl Study for Gluing {
    fn describe(&self) -> &'static str {
        "Sobolev distance between f-only and f+g runs over a remainder-distance sweep"
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        let sc = ctx.cfg.scenario()?;
        let rows = remainder_gluing_probe(&sc, &ctx.cfg.distances(), &ctx.cfg.probe(ctx.opts.jobs))?;
        let mut sink = CsvSink::create(ctx.dir.path(), output::GLUING)?;
        for r in &rows {
            for f in &r.frames {
                sink.write_row(&[
                    r.distance.into(),
                    f.t.into(),
                    f.distance_s1.into(),
                    f.distance_s2.into(),
                    f.chi_distance_s1.into(),
                    f.support_gap.into(),
                    (f.support_gap > 0.0).into(),
                ])?;
            }
        }
        sink.flush()?;
        let sups: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
        write_summary(
            ctx,
            serde_json::json!({
                "R": rows.iter().map(|r| r.distance).collect::<Vec<_>>(),
                "sup_distance_s1": sups,
                "beta": rows.iter().map(|r| r.beta).collect::<Vec<_>>(),
                "non_increasing": non_increasing(&sups, 0.1),
                "disjoint": rows.iter().all(|r| r.disjoint),
            }),
        )?;
        Ok(Outcome::Finished)
    }
}

struct Selftest;

impl Study for Selftest {
    fn describe(&self) -> &'static str {
        "built-in consistency checks on small grids"
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome> {
        let results = selftest::run_all();
        let mut report = String::new();
        let mut failed = 0;
        for r in &results {
            let line = format!("{} {} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
            writeln!(ctx.out, "{line}").map_err(|e| Error::io("<stdout>", e))?;
            report.push_str(&line);
            report.push('\n');
            failed += usize::from(!r.pass);
        }
        let path = ctx.dir.join("selftest.txt");
        fs::write(&path, report).map_err(|e| Error::io(&path, e))?;
        if failed > 0 {
            return Err(Error::Selftest(failed));
        }
        Ok(Outcome::Finished)
    }
}

pub fn study_registry() -> Registry<dyn Study> {
    let mut reg: Registry<dyn Study> = Registry::new("mode");
    reg.register(
        "simulate",
        Box::new(Evolving {
            about: "Euler run with tracers, thinning events, angular measure and energy transfer",
            outputs: Outputs {
                tracers: true,
                transfer: true,
                angular: true,
                events: true,
            },
        }),
    )
    .register(
        "transfer",
        Box::new(Evolving {
            about: "labelled large/small-scale run with the energy-transfer inequality per frame",
            outputs: Outputs {
                tracers: false,
                transfer: true,
                angular: false,
                events: false,
            },
        }),
    )
    .register(
        "classify",
        Box::new(Evolving {
            about: "angular measure I(t, r0) over the annulus and the case dichotomy",
            outputs: Outputs {
                tracers: false,
                transfer: false,
                angular: true,
                events: false,
            },
        }),
    )
    .register("prescribed", Box::new(Prescribed))
    .register("zlatos", Box::new(Zlatos))
    .register("stability", Box::new(Stability))
    .register("gluing", Box::new(Gluing))
    .register("selftest", Box::new(Selftest));
    reg
}
