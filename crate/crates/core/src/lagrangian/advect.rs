use rayon::prelude::*;

use super::interp::Stencil;
use super::tracer::{Mat2, Tracer};
use crate::spectral::{velocity_gradient, Grid, ScalarField, VectorField};

/// Velocity and velocity gradient (`[i][j] = d u_i / d x_j`) at a point.
pub trait VelocityEval: Sync {
    fn eval(&self, x: [f64; 2]) -> ([f64; 2], Mat2);
}

pub struct ZeroFlow;

impl VelocityEval for ZeroFlow {
    fn eval(&self, _x: [f64; 2]) -> ([f64; 2], Mat2) {
        ([0.0; 2], [[0.0; 2]; 2])
    }
}

/// Closed-form flow, mostly for tests.
pub struct AnalyticFlow<F>(pub F);

impl<F> VelocityEval for AnalyticFlow<F>
where
    F: Fn([f64; 2]) -> ([f64; 2], Mat2) + Sync,
{
    fn eval(&self, x: [f64; 2]) -> ([f64; 2], Mat2) {
        (self.0)(x)
    }
}

/// Gridded velocity plus its spectral gradient, interpolated off-grid.
#[derive(Debug, Clone)]
pub struct FlowSnapshot {
    grid: Grid,
    u1: ScalarField,
    u2: ScalarField,
    d11: ScalarField,
    d12: ScalarField,
    d21: ScalarField,
}

impl FlowSnapshot {
    pub fn new(u: &VectorField) -> Self {
        let [[d11, d12], [d21, _]] = velocity_gradient(u);
        Self {
            grid: u.grid(),
            u1: u.u1.clone(),
            u2: u.u2.clone(),
            d11,
            d12,
            d21,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn velocity(&self) -> VectorField {
        VectorField {
            u1: self.u1.clone(),
            u2: self.u2.clone(),
        }
    }

    /// `sup |grad u|` over the grid (Frobenius norm per node).
    pub fn sup_gradient(&self) -> f64 {
        let (a, b, c) = (self.d11.samples(), self.d12.samples(), self.d21.samples());
        (0..a.len()).fold(0.0f64, |m, i| {
            m.max((2.0 * a[i] * a[i] + b[i] * b[i] + c[i] * c[i]).sqrt())
        })
    }
}

impl VelocityEval for FlowSnapshot {
    fn eval(&self, x: [f64; 2]) -> ([f64; 2], Mat2) {
        let n = self.grid.n();
        let st = Stencil::new(self.grid, x);
        let d11 = st.apply(n, self.d11.samples());
        (
            [st.apply(n, self.u1.samples()), st.apply(n, self.u2.samples())],
            [
                [d11, st.apply(n, self.d12.samples())],
                // incompressibility fixes d2 u2
                [st.apply(n, self.d21.samples()), -d11],
            ],
        )
    }
}

/// Linear-in-time blend `(1 - w) a + w b` of two snapshots.
pub struct Blend<'a> {
    a: &'a dyn VelocityEval,
    b: &'a dyn VelocityEval,
    w: f64,
}

impl VelocityEval for Blend<'_> {
    fn eval(&self, x: [f64; 2]) -> ([f64; 2], Mat2) {
        let (ua, ga) = self.a.eval(x);
        let (ub, gb) = self.b.eval(x);
        let w = self.w;
        let mix = |p: f64, q: f64| (1.0 - w) * p + w * q;
        (
            [mix(ua[0], ub[0]), mix(ua[1], ub[1])],
            [
                [mix(ga[0][0], gb[0][0]), mix(ga[0][1], gb[0][1])],
                [mix(ga[1][0], gb[1][0]), mix(ga[1][1], gb[1][1])],
            ],
        )
    }
}

/// RK4 stage velocities obtained by linear interpolation between the
/// snapshots at the start and end of a step.
pub fn interpolated_stages<'a>(
    start: &'a dyn VelocityEval,
    end: &'a dyn VelocityEval,
) -> [Blend<'a>; 4] {
    [0.0, 0.5, 0.5, 1.0].map(|w| Blend { a: start, b: end, w })
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn axpy(x: [f64; 2], a: f64, v: [f64; 2]) -> [f64; 2] {
    [x[0] + a * v[0], x[1] + a * v[1]]
}

fn maxpy(j: &Mat2, a: f64, k: &Mat2) -> Mat2 {
    [
        [j[0][0] + a * k[0][0], j[0][1] + a * k[0][1]],
        [j[1][0] + a * k[1][0], j[1][1] + a * k[1][1]],
    ]
}

/// One classical RK4 step of `dx/dt = u(t, x)`, `dJ/dt = grad u(t, x) J`.
///
/// `stages` are the velocities at `t`, `t + dt/2`, `t + dt/2`, `t + dt`,
/// matching the stages of the field integrator.
pub fn advect_tracers(tracers: &mut [Tracer], stages: [&dyn VelocityEval; 4], dt: f64) {
    tracers.par_iter_mut().for_each(|tr| {
        let (x, j) = (tr.x, tr.j);
        let (v1, g1) = stages[0].eval(x);
        let k1j = mat_mul(&g1, &j);
        let x2 = axpy(x, 0.5 * dt, v1);
        let j2 = maxpy(&j, 0.5 * dt, &k1j);
        let (v2, g2) = stages[1].eval(x2);
        let k2j = mat_mul(&g2, &j2);
        let x3 = axpy(x, 0.5 * dt, v2);
        let j3 = maxpy(&j, 0.5 * dt, &k2j);
        let (v3, g3) = stages[2].eval(x3);
        let k3j = mat_mul(&g3, &j3);
        let x4 = axpy(x, dt, v3);
        let j4 = maxpy(&j, dt, &k3j);
        let (v4, g4) = stages[3].eval(x4);
        let k4j = mat_mul(&g4, &j4);
        let h = dt / 6.0;
        for c in 0..2 {
            tr.x[c] = x[c] + h * (v1[c] + 2.0 * v2[c] + 2.0 * v3[c] + v4[c]);
            for d in 0..2 {
                tr.j[c][d] =
                    j[c][d] + h * (k1j[c][d] + 2.0 * k2j[c][d] + 2.0 * k3j[c][d] + k4j[c][d]);
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::TracerLabel;
    use std::f64::consts::PI;

    fn run<F: VelocityEval>(flow: &F, x0: [f64; 2], t_end: f64, steps: usize) -> Tracer {
        let mut tr = [Tracer::new(x0, TracerLabel::Custom)];
        let dt = t_end / steps as f64;
        for _ in 0..steps {
            advect_tracers(&mut tr, [flow, flow, flow, flow], dt);
        }
        tr[0]
    }

    #[test]
    fn zero_flow_is_a_no_op() {
        let t = run(&ZeroFlow, [0.3, -0.4], 1.0, 10);
        assert_eq!(t.x, [0.3, -0.4]);
        assert_eq!(t.j, super::super::tracer::IDENTITY);
    }

    #[test]
    fn rigid_rotation() {
        let flow = AnalyticFlow(|x: [f64; 2]| ([-x[1], x[0]], [[0.0, -1.0], [1.0, 0.0]]));
        let x0 = [0.7, 0.2];
        let t = run(&flow, x0, 1.0, 100);
        let r0 = x0[0].hypot(x0[1]);
        assert!((t.x[0].hypot(t.x[1]) - r0).abs() < 1e-8);
        let jtj = [
            t.j[0][0] * t.j[0][0] + t.j[1][0] * t.j[1][0],
            t.j[0][0] * t.j[0][1] + t.j[1][0] * t.j[1][1],
            t.j[0][1] * t.j[0][1] + t.j[1][1] * t.j[1][1],
        ];
        assert!((jtj[0] - 1.0).abs() < 1e-6 && jtj[1].abs() < 1e-6 && (jtj[2] - 1.0).abs() < 1e-6);
        assert!((t.x[0] - (x0[0] * 1f64.cos() - x0[1] * 1f64.sin())).abs() < 1e-8);
    }

    #[test]
    fn linear_strain() {
        let flow = AnalyticFlow(|x: [f64; 2]| ([x[0], -x[1]], [[1.0, 0.0], [0.0, -1.0]]));
        let t = run(&flow, [0.1, 0.2], 1.0, 100);
        let e = 1f64.exp();
        assert!((t.j[0][0] / e - 1.0).abs() < 1e-6);
        assert!((t.j[1][1] * e - 1.0).abs() < 1e-6);
        assert_eq!(t.j[0][1], 0.0);
        assert!((t.x[0] / (0.1 * e) - 1.0).abs() < 1e-6);
        assert!((t.det() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn snapshot_matches_analytic_mode() {
        let g = Grid::new(64, PI).unwrap();
        // u = (sin x1 cos x2, -cos x1 sin x2)
        let u = VectorField::from_fn(g, |x| {
            [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin()]
        });
        let snap = FlowSnapshot::new(&u);
        let x = [0.31, -1.7];
        let (v, gr) = snap.eval(x);
        assert!((v[0] - x[0].sin() * x[1].cos()).abs() < 1e-5);
        assert!((gr[0][0] - x[0].cos() * x[1].cos()).abs() < 1e-5);
        assert!((gr[0][1] + x[0].sin() * x[1].sin()).abs() < 1e-5);
        assert!((gr[1][0] - x[0].sin() * x[1].sin()).abs() < 1e-5);
        assert!((gr[1][1] + x[0].cos() * x[1].cos()).abs() < 1e-5);
    }

    #[test]
    fn blend_is_linear() {
        let a = AnalyticFlow(|_x: [f64; 2]| ([1.0, 0.0], [[0.0; 2]; 2]));
        let b = AnalyticFlow(|_x: [f64; 2]| ([3.0, 2.0], [[1.0, 0.0], [0.0, -1.0]]));
        let st = interpolated_stages(&a, &b);
        let (v, g) = st[1].eval([0.0, 0.0]);
        assert_eq!(v, [2.0, 1.0]);
        assert_eq!(g[0][0], 0.5);
    }
}
