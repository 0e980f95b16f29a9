use super::{band_limit_in_place, fft, modes, SpectralField};
use crate::Result;
use num_complex::Complex64;

/// Largest `K` with `3K < N`: modes with some `|k_i| > K` are removed before
/// quadratic products, so the retained band is alias-free.
pub fn dealias_cutoff(n: usize) -> usize {
    (n - 1) / 3
}

/// Pseudo-spectral transport operator `v ↦ (w·∇)v` for a frozen velocity `w`.
///
/// Inputs are restricted to the dealiased band and the product is truncated
/// back to it, which makes `v ↦ (w·∇)v` an exact Galerkin operator on the band:
/// `∫ (w·∇)v · v dx = 0` whenever `w` is divergence-free.
pub struct Convector {
    n: usize,
    kmax: usize,
    w_grid: [Vec<f64>; 3],
}

impl Convector {
    pub fn new(w: &SpectralField) -> Self {
        let n = w.n();
        let kmax = dealias_cutoff(n);
        let w_grid = w.band_limited(kmax).to_grid();
        Self { n, kmax, w_grid }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &SpectralField) -> Result<SpectralField> {
        if v.n() != self.n {
            return Err(crate::Error::ResolutionMismatch {
                left: self.n,
                right: v.n(),
            });
        }
        let vd = v.band_limited(self.kmax);
        let coeffs = self.apply_coeffs(vd.all_coeffs());
        let mut out = SpectralField::from_coeffs(self.n, coeffs)?;
        out.set_divergence_free(false);
        Ok(out)
    }

    /// Works on band-limited coefficient arrays directly.
    pub(crate) fn apply_coeffs(&self, v: &[Vec<Complex64>; 3]) -> [Vec<Complex64>; 3] {
        let n = self.n;
        let plan = fft::plan(n);
        let table = modes(n);
        let i = Complex64::i();
        let grad_spec = |c: usize, d: usize| -> Vec<Complex64> {
            v[c].iter()
                .zip(&table.kd)
                .map(|(z, kd)| i * kd[d] * z)
                .collect()
        };
        // 9 real gradient grids packed into 5 complex transforms
        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(9);
        let pairs = [(0, 1), (2, 3), (4, 5), (6, 7)];
        let spec_of = |j: usize| grad_spec(j / 3, j % 3);
        for (a, b) in pairs {
            let (ga, gb) = plan.inverse_pair(&spec_of(a), &spec_of(b));
            grads.push(ga);
            grads.push(gb);
        }
        grads.push(plan.inverse_real(&spec_of(8)));

        let len = n * n * n;
        let mut prod: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
        for c in 0..3 {
            let out = &mut prod[c];
            for d in 0..3 {
                let g = &grads[3 * c + d];
                let w = &self.w_grid[d];
                for x in 0..len {
                    out[x] += w[x] * g[x];
                }
            }
        }
        let (a, b) = plan.forward_pair(&prod[0], &prod[1]);
        let c = plan.forward_real(&prod[2]);
        let mut coeffs = [a, b, c];
        band_limit_in_place(n, self.kmax, &mut coeffs);
        coeffs
    }
}

/// `(u·∇)v` with 2/3-rule dealiasing.
pub fn convect(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_n(v)?;
    Convector::new(u).apply(v)
}
