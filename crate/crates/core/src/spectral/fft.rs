//! Real 2D transforms on `n x n` grids.
//!
//! Rows (along x2) are transformed two at a time by packing a pair of real
//! rows into one complex signal; the half spectrum is then transposed so the
//! column transforms (along x1) run over contiguous memory. The spectrum is
//! stored as `n/2 + 1` rows indexed by the non-negative x2 mode, each holding
//! all `n` x1 modes.
//!
//! Every row/column transform is independent, so the output does not depend
//! on how rayon splits the work.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct FftPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub(crate) fn plan(n: usize) -> Arc<FftPlan> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<FftPlan>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(FftPlan {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl FftPlan {
    pub(crate) fn half(&self) -> usize {
        self.n / 2 + 1
    }

    /// Forward transform normalized so that `f(x) = sum_k c_k exp(i k.x)`.
    pub(crate) fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let h = self.half();
        debug_assert_eq!(samples.len(), n * n);

        // Row transforms, two real rows per complex FFT.
        let mut rows = vec![Complex64::default(); n * h];
        let scratch_len = self.forward.get_inplace_scratch_len();
        rows.par_chunks_mut(2 * h)
            .zip(samples.par_chunks(2 * n))
            .for_each_init(
                || (vec![Complex64::default(); n], vec![Complex64::default(); scratch_len]),
                |(buf, scratch), (out, pair)| {
                    let (a, b) = pair.split_at(n);
                    for (z, (&ra, &rb)) in buf.iter_mut().zip(a.iter().zip(b)) {
                        *z = Complex64::new(ra, rb);
                    }
                    self.forward.process_with_scratch(buf, scratch);
                    let (oa, ob) = out.split_at_mut(h);
                    for k in 0..h {
                        let z = buf[k];
                        let zc = buf[(n - k) % n].conj();
                        oa[k] = (z + zc) * 0.5;
                        // (z - zc) / (2i)
                        let d = z - zc;
                        ob[k] = Complex64::new(d.im * 0.5, -d.re * 0.5);
                    }
                },
            );

        // Transpose to mode-major layout and transform along x1.
        let scale = 1.0 / (n * n) as f64;
        let mut spec = vec![Complex64::default(); h * n];
        let scratch_len = self.forward.get_inplace_scratch_len();
        spec.par_chunks_mut(n).enumerate().for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, (j2, col)| {
                for (i1, c) in col.iter_mut().enumerate() {
                    *c = rows[i1 * h + j2];
                }
                self.forward.process_with_scratch(col, scratch);
                for c in col.iter_mut() {
                    *c *= scale;
                }
            },
        );
        spec
    }

    /// Inverse of [`FftPlan::forward`]; imaginary parts that a real field
    /// cannot carry are discarded.
    pub(crate) fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let h = self.half();
        debug_assert_eq!(spec.len(), n * h);

        let mut cols = spec.to_vec();
        let scratch_len = self.inverse.get_inplace_scratch_len();
        cols.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, col| self.inverse.process_with_scratch(col, scratch),
        );

        let mut samples = vec![0.0; n * n];
        samples.par_chunks_mut(2 * n).enumerate().for_each_init(
            || (vec![Complex64::default(); n], vec![Complex64::default(); scratch_len]),
            |(buf, scratch), (pair_idx, out)| {
                let ia = 2 * pair_idx;
                let ib = ia + 1;
                for k in 0..h {
                    let mut a = cols[k * n + ia];
                    let mut b = cols[k * n + ib];
                    if k == 0 || k == n / 2 {
                        a.im = 0.0;
                        b.im = 0.0;
                    }
                    // a + i b
                    buf[k] = Complex64::new(a.re - b.im, a.im + b.re);
                    if k != 0 && k != n / 2 {
                        let ac = a.conj();
                        let bc = b.conj();
                        buf[n - k] = Complex64::new(ac.re - bc.im, ac.im + bc.re);
                    }
                }
                self.inverse.process_with_scratch(buf, scratch);
                let (oa, ob) = out.split_at_mut(n);
                for (i, z) in buf.iter().enumerate() {
                    oa[i] = z.re;
                    ob[i] = z.im;
                }
            },
        );
        samples
    }
}
