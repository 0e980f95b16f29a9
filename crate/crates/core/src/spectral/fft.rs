//! Cached 3D complex FFTs on the `N³` collocation grid.
//!
//! Normalisation: `û_k = N⁻³ Σ_x u(x) e^{-ik·x}` forward, plain synthesis
//! backward. Grid index is `i1 + N (i2 + N i3)`, axis 1 fastest.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `neg[i]` is the flat index of `-k` for flat index `i`.
    neg: Vec<usize>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            let mut neg = vec![0; n * n * n];
            for i3 in 0..n {
                for i2 in 0..n {
                    for i1 in 0..n {
                        let m = |i: usize| (n - i) % n;
                        neg[i1 + n * (i2 + n * i3)] = m(i1) + n * (m(i2) + n * m(i3));
                    }
                }
            }
            Arc::new(Fft3 {
                n,
                forward,
                inverse,
                neg,
            })
        })
        .clone()
}

impl Fft3 {
    pub(crate) fn neg(&self) -> &[usize] {
        &self.neg
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n * n);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // axis 1: contiguous lines
        fft.process_with_scratch(data, &mut scratch);
        let mut buf = vec![Complex64::default(); n * n];
        // axis 2
        for i3 in 0..n {
            let base = n * n * i3;
            for i1 in 0..n {
                for i2 in 0..n {
                    buf[i1 * n + i2] = data[base + i1 + n * i2];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i1 in 0..n {
                for i2 in 0..n {
                    data[base + i1 + n * i2] = buf[i1 * n + i2];
                }
            }
        }
        // axis 3
        for i2 in 0..n {
            for i1 in 0..n {
                for i3 in 0..n {
                    buf[i1 * n + i3] = data[i1 + n * (i2 + n * i3)];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i1 in 0..n {
                for i3 in 0..n {
                    data[i1 + n * (i2 + n * i3)] = buf[i1 * n + i3];
                }
            }
        }
    }

    /// Grid values to normalised coefficients.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let s = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Coefficients to grid values.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    /// Synthesise two real grid functions from two Hermitian spectra with one
    /// complex transform.
    pub(crate) fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::i();
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
        self.inverse(&mut z);
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    pub(crate) fn inverse_real(&self, a: &[Complex64]) -> Vec<f64> {
        let mut z = a.to_vec();
        self.inverse(&mut z);
        z.iter().map(|c| c.re).collect()
    }

    /// Analyse two real grid functions with one complex transform. Outputs are
    /// exactly Hermitian.
    pub(crate) fn forward_pair(&self, x: &[f64], y: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut z: Vec<Complex64> = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        self.forward(&mut z);
        let mut xa = vec![Complex64::default(); z.len()];
        let mut ya = vec![Complex64::default(); z.len()];
        for (k, &mk) in self.neg.iter().enumerate() {
            let zk = z[k];
            let zm = z[mk].conj();
            xa[k] = 0.5 * (zk + zm);
            // (zk - zm) / (2i)
            let d = zk - zm;
            ya[k] = Complex64::new(0.5 * d.im, -0.5 * d.re);
        }
        (xa, ya)
    }

    pub(crate) fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = x.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        self.forward(&mut z);
        // symmetrise so the spectrum is exactly Hermitian
        let mut out = vec![Complex64::default(); z.len()];
        for (k, &mk) in self.neg.iter().enumerate() {
            out[k] = 0.5 * (z[k] + z[mk].conj());
        }
        out
    }
}
