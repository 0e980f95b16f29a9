//! Fourier representation of real fields on `[0, 2π)³`.
//!
//! Coefficients are stored in FFT order: flat index `i1 + N (i2 + N i3)` maps
//! to the wavevector `(k(i1), k(i2), k(i3))` with `k(i) = i` for `i < N/2` and
//! `i - N` otherwise. Derivatives treat the Nyquist wavenumber `-N/2` as zero so
//! that real fields stay real; norms use the true wavenumber.
//!
//! Sobolev norms use the Bessel-potential convention
//! `‖v‖_{W^{s,2}}² = (2π)³ Σ_k (1+|k|²)^s |v̂_k|²`, equivalent to the usual
//! norms on the torus.

mod convect;
pub(crate) mod fft;
mod lattice;
mod pressure;
mod snapshot;

pub use convect::{convect, dealias_cutoff, Convector};
pub use lattice::{eval_lattice, LatticeSpec};
pub use pressure::{div_div_product, pressure_decompose, PressureParts};
pub(crate) use pressure::{noise_pressure, require_solenoidal};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};

use crate::{Error, Result, VOLUME};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Per-resolution wavenumber tables.
pub(crate) struct ModeTable {
    /// True integer wavevector.
    pub k: Vec<[i64; 3]>,
    /// Derivative wavevector (Nyquist component set to zero).
    pub kd: Vec<[f64; 3]>,
    /// `|k|²` with the true wavevector.
    pub k2: Vec<f64>,
}

static MODES: OnceLock<Mutex<HashMap<usize, Arc<ModeTable>>>> = OnceLock::new();

/// Signed wavenumber of FFT index `i` at resolution `n`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub(crate) fn modes(n: usize) -> Arc<ModeTable> {
    let cache = MODES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("mode table cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let len = n * n * n;
            let mut k = Vec::with_capacity(len);
            let mut kd = Vec::with_capacity(len);
            let mut k2 = Vec::with_capacity(len);
            let nyq = -(n as i64) / 2;
            for i3 in 0..n {
                for i2 in 0..n {
                    for i1 in 0..n {
                        let kk = [wavenumber(i1, n), wavenumber(i2, n), wavenumber(i3, n)];
                        let d = kk.map(|c| if c == nyq { 0.0 } else { c as f64 });
                        k2.push(kk.iter().map(|&c| (c * c) as f64).sum());
                        k.push(kk);
                        kd.push(d);
                    }
                }
            }
            Arc::new(ModeTable { k, kd, k2 })
        })
        .clone()
}

pub(crate) fn check_resolution(n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "resolution must be even and at least 4, got {n}"
        )));
    }
    Ok(())
}

/// Velocity field given by its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: [Vec<Complex64>; 3],
    divergence_free: bool,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_resolution(n)?;
        let len = n * n * n;
        Ok(Self {
            n,
            coeffs: std::array::from_fn(|_| vec![Complex64::default(); len]),
            divergence_free: true,
        })
    }

    /// Build a field from raw coefficients; the divergence-free flag is
    /// recomputed.
    pub fn from_coeffs(n: usize, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        check_resolution(n)?;
        if coeffs.iter().any(|c| c.len() != n * n * n) {
            return Err(Error::invalid("coefficient arrays must have N³ entries"));
        }
        let mut f = Self {
            n,
            coeffs,
            divergence_free: false,
        };
        f.divergence_free = f.divergence_residual() <= 1e-12;
        Ok(f)
    }

    /// Analyse grid values (three components, each of length `N³`).
    pub fn from_grid(n: usize, grid: &[Vec<f64>; 3]) -> Result<Self> {
        check_resolution(n)?;
        if grid.iter().any(|g| g.len() != n * n * n) {
            return Err(Error::invalid("grid arrays must have N³ entries"));
        }
        let plan = fft::plan(n);
        let (a, b) = plan.forward_pair(&grid[0], &grid[1]);
        let c = plan.forward_real(&grid[2]);
        let mut f = Self {
            n,
            coeffs: [a, b, c],
            divergence_free: false,
        };
        f.divergence_free = f.divergence_residual() <= 1e-12;
        Ok(f)
    }

    /// Sample a function of position on the collocation grid and analyse it.
    pub fn from_fn(n: usize, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        check_resolution(n)?;
        let grid = sample_grid(n, |x| f(x));
        Self::from_grid(n, &grid)
    }

    pub fn to_grid(&self) -> [Vec<f64>; 3] {
        let plan = fft::plan(self.n);
        let (a, b) = plan.inverse_pair(&self.coeffs[0], &self.coeffs[1]);
        let c = plan.inverse_real(&self.coeffs[2]);
        [a, b, c]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self, component: usize) -> &[Complex64] {
        &self.coeffs[component]
    }

    pub fn all_coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub(crate) fn set_divergence_free(&mut self, flag: bool) {
        self.divergence_free = flag;
    }

    /// Coefficient of wavevector `k` (any integers; reduced modulo `N`).
    pub fn coeff_at(&self, component: usize, k: [i64; 3]) -> Complex64 {
        self.coeffs[component][flat_index(self.n, k)]
    }

    /// `max_k |k·û_k| / |k|`, relative to the largest coefficient magnitude.
    /// Measuring against the field scale keeps roundoff-level modes from
    /// dominating.
    pub fn divergence_residual(&self) -> f64 {
        let table = modes(self.n);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (idx, kd) in table.kd.iter().enumerate() {
            let u = [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]];
            let mag = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
            scale = scale.max(mag);
            let kmag = (kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2]).sqrt();
            if kmag == 0.0 {
                continue;
            }
            let div = u[0] * kd[0] + u[1] * kd[1] + u[2] * kd[2];
            worst = worst.max(div.norm() / kmag);
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Leray projection `v ↦ v − ∇Δ⁻¹ div v`.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        leray_in_place(self.n, &mut out.coeffs);
        out.divergence_free = true;
        out
    }

    /// `‖v‖_{W^{s,2}}` for `s ∈ {0,1,2,3}`.
    pub fn sobolev_norm(&self, s: u32) -> Result<f64> {
        if s > 3 {
            return Err(Error::invalid(format!("Sobolev order {s} not in 0..=3")));
        }
        Ok(self.weighted_norm(|k2| (1.0 + k2).powi(s as i32)))
    }

    /// Homogeneous seminorm `‖∇^s v‖_{L²}`.
    pub fn seminorm(&self, s: u32) -> f64 {
        self.weighted_norm(|k2| k2.powi(s as i32))
    }

    /// All Bessel norms `s = 0..=3` in one pass.
    pub fn sobolev_norms(&self) -> [f64; 4] {
        let table = modes(self.n);
        let mut acc = [0.0f64; 4];
        for (idx, &k2) in table.k2.iter().enumerate() {
            let a: f64 = self.coeffs.iter().map(|c| c[idx].norm_sqr()).sum();
            if a == 0.0 {
                continue;
            }
            let w = 1.0 + k2;
            acc[0] += a;
            acc[1] += a * w;
            acc[2] += a * w * w;
            acc[3] += a * w * w * w;
        }
        acc.map(|s| (VOLUME * s).sqrt())
    }

    fn weighted_norm(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let table = modes(self.n);
        let mut acc = 0.0;
        for (idx, &k2) in table.k2.iter().enumerate() {
            let a: f64 = self.coeffs.iter().map(|c| c[idx].norm_sqr()).sum();
            if a != 0.0 {
                acc += weight(k2) * a;
            }
        }
        (VOLUME * acc).sqrt()
    }

    /// `∫ u·v dx`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_n(other)?;
        let mut acc = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                acc += a.re * b.re + a.im * b.im;
            }
        }
        Ok(VOLUME * acc)
    }

    /// `∫ ∇u : ∇v dx`.
    pub fn grad_inner(&self, other: &Self) -> Result<f64> {
        self.same_n(other)?;
        let table = modes(self.n);
        let mut acc = 0.0;
        for c in 0..3 {
            for (idx, (a, b)) in self.coeffs[c].iter().zip(&other.coeffs[c]).enumerate() {
                acc += table.k2[idx] * (a.re * b.re + a.im * b.im);
            }
        }
        Ok(VOLUME * acc)
    }

    pub(crate) fn same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ResolutionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a += alpha * b;
            }
        }
        out.divergence_free = self.divergence_free && other.divergence_free;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .for_each(|c| c.iter_mut().for_each(|z| *z *= alpha));
        out
    }

    /// Zero every mode with some `|k_i| > kmax`.
    pub fn band_limited(&self, kmax: usize) -> Self {
        let mut out = self.clone();
        band_limit_in_place(self.n, kmax, &mut out.coeffs);
        out
    }

    /// Restriction to the 2/3-rule band `|k_i| < N/3`.
    pub fn dealiased(&self) -> Self {
        self.band_limited(dealias_cutoff(self.n))
    }

    /// Largest `max_i |k_i|` carrying a nonzero coefficient.
    pub fn max_wavenumber(&self) -> usize {
        let table = modes(self.n);
        let mut m = 0;
        for (idx, k) in table.k.iter().enumerate() {
            if self.coeffs.iter().any(|c| c[idx] != Complex64::default()) {
                m = m.max(k.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0));
            }
        }
        m
    }

    /// Divergence as a scalar field.
    pub fn divergence(&self) -> ScalarSpectralField {
        let table = modes(self.n);
        let i = Complex64::i();
        let coeffs = table
            .kd
            .iter()
            .enumerate()
            .map(|(idx, kd)| {
                i * (self.coeffs[0][idx] * kd[0]
                    + self.coeffs[1][idx] * kd[1]
                    + self.coeffs[2][idx] * kd[2])
            })
            .collect();
        ScalarSpectralField { n: self.n, coeffs }
    }

    /// Exact evaluation of the trigonometric series at arbitrary points.
    pub fn evaluate_at_points(&self, points: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let comps = [
            self.coeffs[0].as_slice(),
            self.coeffs[1].as_slice(),
            self.coeffs[2].as_slice(),
        ];
        points
            .iter()
            .map(|&x| {
                let v = eval_series(self.n, &comps, x);
                [v[0], v[1], v[2]]
            })
            .collect()
    }

    /// Resample to another resolution by zero-padding or truncation. Modes that
    /// do not fit are dropped.
    pub fn resample(&self, n: usize) -> Result<Self> {
        check_resolution(n)?;
        let mut out = Self::zeros(n)?;
        let table = modes(self.n);
        let half = (n / 2) as i64;
        for (idx, k) in table.k.iter().enumerate() {
            if k.iter().all(|&c| c > -half && c < half) {
                let j = flat_index(n, *k);
                for c in 0..3 {
                    out.coeffs[c][j] = self.coeffs[c][idx];
                }
            }
        }
        out.divergence_free = out.divergence_residual() <= 1e-12;
        Ok(out)
    }
}

/// Real scalar field given by its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_resolution(n)?;
        Ok(Self {
            n,
            coeffs: vec![Complex64::default(); n * n * n],
        })
    }

    pub fn from_grid(n: usize, grid: &[f64]) -> Result<Self> {
        check_resolution(n)?;
        if grid.len() != n * n * n {
            return Err(Error::invalid("grid array must have N³ entries"));
        }
        Ok(Self {
            n,
            coeffs: fft::plan(n).forward_real(grid),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        check_resolution(n)?;
        let grid = sample_grid(n, |x| [f(x), 0.0, 0.0]);
        Self::from_grid(n, &grid[0])
    }

    pub(crate) fn from_raw(n: usize, coeffs: Vec<Complex64>) -> Self {
        Self { n, coeffs }
    }

    pub fn to_grid(&self) -> Vec<f64> {
        fft::plan(self.n).inverse_real(&self.coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff_at(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[flat_index(self.n, k)]
    }

    /// Mean value (the `k = 0` coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `ℓ²` norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Periodic Laplacian, multiplier `-|k|²`.
    pub fn laplacian(&self) -> Self {
        let table = modes(self.n);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&table.k2)
            .map(|(z, &k2)| -k2 * z)
            .collect();
        Self { n: self.n, coeffs }
    }

    /// Solution operator of the periodic Laplace equation on zero-mean data.
    pub fn inv_laplacian(&self) -> Result<Self> {
        let norm = self.coeff_norm();
        if self.coeffs[0].norm() > 1e-12 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::invalid(
                "inverse Laplacian requires zero-mean data on the torus",
            ));
        }
        let table = modes(self.n);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&table.k2)
            .map(|(z, &k2)| if k2 == 0.0 { Complex64::default() } else { -z / k2 })
            .collect();
        Ok(Self { n: self.n, coeffs })
    }

    pub fn gradient(&self) -> SpectralField {
        let table = modes(self.n);
        let i = Complex64::i();
        let coeffs = std::array::from_fn(|d| {
            self.coeffs
                .iter()
                .zip(&table.kd)
                .map(|(z, kd)| i * kd[d] * z)
                .collect()
        });
        SpectralField {
            n: self.n,
            coeffs,
            divergence_free: false,
        }
    }

    pub fn sobolev_norm(&self, s: u32) -> Result<f64> {
        if s > 3 {
            return Err(Error::invalid(format!("Sobolev order {s} not in 0..=3")));
        }
        let table = modes(self.n);
        let acc: f64 = self
            .coeffs
            .iter()
            .zip(&table.k2)
            .map(|(z, &k2)| (1.0 + k2).powi(s as i32) * z.norm_sqr())
            .sum();
        Ok((VOLUME * acc).sqrt())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ResolutionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn evaluate_at_points(&self, points: &[[f64; 3]]) -> Vec<f64> {
        points
            .iter()
            .map(|&x| eval_series(self.n, &[self.coeffs.as_slice()], x)[0])
            .collect()
    }
}

pub(crate) fn flat_index(n: usize, k: [i64; 3]) -> usize {
    let w = |c: i64| c.rem_euclid(n as i64) as usize;
    w(k[0]) + n * (w(k[1]) + n * w(k[2]))
}

/// Grid coordinates of collocation point `idx`.
pub fn grid_point(n: usize, idx: usize) -> [f64; 3] {
    let h = crate::PERIOD / n as f64;
    [
        (idx % n) as f64 * h,
        ((idx / n) % n) as f64 * h,
        (idx / (n * n)) as f64 * h,
    ]
}

pub(crate) fn sample_grid(n: usize, f: impl Fn([f64; 3]) -> [f64; 3]) -> [Vec<f64>; 3] {
    let len = n * n * n;
    let mut grid: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(len));
    for idx in 0..len {
        let v = f(grid_point(n, idx));
        for c in 0..3 {
            grid[c].push(v[c]);
        }
    }
    grid
}

pub(crate) fn leray_in_place(n: usize, coeffs: &mut [Vec<Complex64>; 3]) {
    let table = modes(n);
    for (idx, kd) in table.kd.iter().enumerate() {
        let kk = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
        if kk == 0.0 {
            continue;
        }
        let dot = (coeffs[0][idx] * kd[0] + coeffs[1][idx] * kd[1] + coeffs[2][idx] * kd[2]) / kk;
        for c in 0..3 {
            coeffs[c][idx] -= dot * kd[c];
        }
    }
}

pub(crate) fn band_limit_in_place(n: usize, kmax: usize, coeffs: &mut [Vec<Complex64>]) {
    let table = modes(n);
    let kmax = kmax as i64;
    for (idx, k) in table.k.iter().enumerate() {
        if k.iter().any(|c| c.abs() > kmax) {
            for c in coeffs.iter_mut() {
                c[idx] = Complex64::default();
            }
        }
    }
}

/// Direct evaluation of one or more coefficient arrays at a point.
fn eval_series(n: usize, comps: &[&[Complex64]], x: [f64; 3]) -> Vec<f64> {
    let phase: Vec<Vec<Complex64>> = (0..3)
        .map(|d| {
            (0..n)
                .map(|i| Complex64::from_polar(1.0, wavenumber(i, n) as f64 * x[d]))
                .collect()
        })
        .collect();
    let mut out = vec![0.0; comps.len()];
    for i3 in 0..n {
        for i2 in 0..n {
            let p23 = phase[1][i2] * phase[2][i3];
            for i1 in 0..n {
                let idx = i1 + n * (i2 + n * i3);
                let p = phase[0][i1] * p23;
                for (o, c) in out.iter_mut().zip(comps) {
                    let z = c[idx];
                    if z != Complex64::default() {
                        *o += (z * p).re;
                    }
                }
            }
        }
    }
    out
}

/// Random divergence-free field with modes `|k_i| ≤ kmax`, coefficients
/// decaying like `(1+|k|²)^{-1}`, normalised to unit `L²` norm. Draws come
/// from the keyed Gaussian generator, so the field is a pure function of
/// `(n, kmax, seed)`.
pub fn random_solenoidal(n: usize, kmax: usize, seed: u64) -> Result<SpectralField> {
    check_resolution(n)?;
    if kmax == 0 || 2 * kmax >= n {
        return Err(Error::invalid("kmax must satisfy 1 <= kmax < N/2"));
    }
    let table = modes(n);
    let mut coeffs: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); n * n * n]);
    let neg = fft::plan(n);
    let neg = neg.neg();
    let km = kmax as i64;
    for (idx, k) in table.k.iter().enumerate() {
        if k.iter().any(|c| c.abs() > km) || *k == [0, 0, 0] {
            continue;
        }
        let mi = neg[idx];
        if mi < idx {
            continue;
        }
        let decay = 1.0 / (1.0 + table.k2[idx]);
        for c in 0..3 {
            let key = (idx * 3 + c) as u128;
            let re = crate::noise::rng::gaussian(seed, u64::MAX, 2 * key);
            let im = crate::noise::rng::gaussian(seed, u64::MAX, 2 * key + 1);
            let z = if mi == idx {
                Complex64::new(re, 0.0)
            } else {
                Complex64::new(re, im)
            } * decay;
            coeffs[c][idx] = z;
            coeffs[c][mi] = z.conj();
        }
    }
    leray_in_place(n, &mut coeffs);
    let mut f = SpectralField {
        n,
        coeffs,
        divergence_free: true,
    };
    let norm = f.sobolev_norm(0)?;
    if norm > 0.0 {
        f = f.scaled(1.0 / norm);
    }
    Ok(f)
}

