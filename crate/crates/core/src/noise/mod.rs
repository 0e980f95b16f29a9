//! Truncated cylindrical Wiener process and the diffusion coefficient `Φ`.
//!
//! The auxiliary Hilbert space is the span of `J` abstract modes `e_j`. Each
//! mode carries a wavevector `k_j`, a spatial profile `σ_j(x) = cos(k_j·x)` or
//! `sin(k_j·x)` and an amplitude `λ_j = (1+|k_j|²)^{-r}`. The concrete
//! coefficient is
//!
//! * multiplicative: `Φ(u)e_j(x) = γ λ_j σ_j(x) f(u(x))`, `f(v) = (sin v₁, sin v₂, sin v₃)`;
//! * additive: `Φ(u)e_j(x) = γ λ_j σ_j(x) (1,1,1)/√3`.

pub mod rng;

use crate::spectral::SpectralField;
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseBasisMode {
    /// 1-based position in the ordered basis.
    pub index: usize,
    pub k: [i64; 3],
    pub amplitude: f64,
    pub profile: Profile,
}

impl NoiseBasisMode {
    pub fn k_squared(&self) -> f64 {
        self.k.iter().map(|&c| (c * c) as f64).sum()
    }

    /// `σ_j(x)`.
    pub fn profile_at(&self, x: [f64; 3]) -> f64 {
        let phase: f64 = (0..3).map(|d| self.k[d] as f64 * x[d]).sum();
        match self.profile {
            Profile::Cos => phase.cos(),
            Profile::Sin => phase.sin(),
        }
    }
}

/// Enumerate the first `j` basis modes for decay exponent `r`.
///
/// Wavevectors are taken from the half lattice (first nonzero component
/// positive) so that `±k` are not both used. Order: `|k|²` ascending, then
/// lexicographically descending `k`, then `cos` before `sin`.
pub fn build_basis(j: usize, r: f64) -> Result<Vec<NoiseBasisMode>> {
    if j == 0 {
        return Err(Error::invalid("noise basis needs at least one mode"));
    }
    if !(r >= 2.0) {
        return Err(Error::invalid(format!("decay exponent r must be >= 2, got {r}")));
    }
    let mut radius = 1i64;
    loop {
        let mut ks = Vec::new();
        for a in -radius..=radius {
            for b in -radius..=radius {
                for c in -radius..=radius {
                    let k = [a, b, c];
                    let first = k.iter().copied().find(|&x| x != 0);
                    if first.is_some_and(|x| x > 0) && a * a + b * b + c * c <= radius * radius {
                        ks.push(k);
                    }
                }
            }
        }
        if 2 * ks.len() >= j {
            ks.sort_by(|x, y| {
                let nx: i64 = x.iter().map(|c| c * c).sum();
                let ny: i64 = y.iter().map(|c| c * c).sum();
                nx.cmp(&ny).then_with(|| y.cmp(x))
            });
            let modes = ks
                .iter()
                .flat_map(|&k| [(k, Profile::Cos), (k, Profile::Sin)])
                .take(j)
                .enumerate()
                .map(|(i, (k, profile))| {
                    let k2: i64 = k.iter().map(|c| c * c).sum();
                    NoiseBasisMode {
                        index: i + 1,
                        k,
                        amplitude: (1.0 + k2 as f64).powf(-r),
                        profile,
                    }
                })
                .collect();
            return Ok(modes);
        }
        radius += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    Additive,
    Multiplicative,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(Self::Additive),
            "multiplicative" => Ok(Self::Multiplicative),
            other => Err(Error::Config(format!("unknown noise kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Additive => "additive",
            Self::Multiplicative => "multiplicative",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionConfig {
    pub kind: NoiseKind,
    /// Spectral decay exponent.
    pub r: f64,
    /// Overall noise scale.
    pub gamma: f64,
    /// Number of noise modes `J`.
    pub modes: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            kind: NoiseKind::Additive,
            r: 2.0,
            gamma: 0.5,
            modes: 16,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 2.0) {
            return Err(Error::invalid(format!("noise.r must be >= 2, got {}", self.r)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::invalid(format!("noise.gamma must be >= 0, got {}", self.gamma)));
        }
        if self.modes == 0 {
            return Err(Error::invalid("noise.J must be >= 1"));
        }
        Ok(())
    }
}

/// The diffusion coefficient `Φ` together with its mode basis.
#[derive(Clone, Debug)]
pub struct Diffusion {
    config: DiffusionConfig,
    basis: Vec<NoiseBasisMode>,
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

impl Diffusion {
    pub fn new(config: DiffusionConfig) -> Result<Self> {
        config.validate()?;
        let basis = build_basis(config.modes, config.r)?;
        Ok(Self { config, basis })
    }

    pub fn config(&self) -> &DiffusionConfig {
        &self.config
    }

    pub fn basis(&self) -> &[NoiseBasisMode] {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.len()
    }

    /// `γ = 0`: `Φ ≡ 0`.
    pub fn is_zero(&self) -> bool {
        self.config.gamma == 0.0
    }

    /// Pointwise nonlinearity `f`, or the constant direction for additive noise.
    pub fn nonlinearity(&self, u: [f64; 3]) -> [f64; 3] {
        match self.config.kind {
            NoiseKind::Multiplicative => u.map(f64::sin),
            NoiseKind::Additive => [INV_SQRT3; 3],
        }
    }

    /// `γ λ_j σ_j(x)` for every mode and point, laid out `[j][point]`.
    pub fn mode_weights(&self, points: &[[f64; 3]]) -> Vec<Vec<f64>> {
        self.basis
            .iter()
            .map(|m| {
                let w = self.config.gamma * m.amplitude;
                points.iter().map(|&x| w * m.profile_at(x)).collect()
            })
            .collect()
    }

    /// `γ λ_j σ_j` on the `N³` collocation grid.
    fn mode_weight_grid(&self, n: usize, j: usize) -> Vec<f64> {
        let m = &self.basis[j];
        let h = crate::PERIOD / n as f64;
        let phase: Vec<Vec<Complex64>> = (0..3)
            .map(|d| {
                (0..n)
                    .map(|i| Complex64::from_polar(1.0, m.k[d] as f64 * i as f64 * h))
                    .collect()
            })
            .collect();
        let w = self.config.gamma * m.amplitude;
        let mut out = Vec::with_capacity(n * n * n);
        for i3 in 0..n {
            for i2 in 0..n {
                let p23 = phase[1][i2] * phase[2][i3];
                for i1 in 0..n {
                    let z = phase[0][i1] * p23;
                    out.push(
                        w * match m.profile {
                            Profile::Cos => z.re,
                            Profile::Sin => z.im,
                        },
                    );
                }
            }
        }
        out
    }

    fn nonlinearity_grid(&self, u: &SpectralField) -> [Vec<f64>; 3] {
        match self.config.kind {
            NoiseKind::Multiplicative => u.to_grid().map(|g| g.into_iter().map(f64::sin).collect()),
            NoiseKind::Additive => {
                let len = u.n().pow(3);
                std::array::from_fn(|_| vec![INV_SQRT3; len])
            }
        }
    }

    /// `Φ(u) ΔW = Σ_j Φ(u)e_j Δβ_j` as a general (not solenoidal) field.
    pub fn apply(&self, u: &SpectralField, increments: &[f64]) -> Result<SpectralField> {
        if increments.len() != self.modes() {
            return Err(Error::invalid(format!(
                "expected {} noise increments, got {}",
                self.modes(),
                increments.len()
            )));
        }
        let n = u.n();
        let len = n * n * n;
        let mut scalar = vec![0.0; len];
        if !self.is_zero() {
            for (j, &db) in increments.iter().enumerate() {
                if db == 0.0 {
                    continue;
                }
                let wj = self.mode_weight_grid(n, j);
                for (s, w) in scalar.iter_mut().zip(&wj) {
                    *s += w * db;
                }
            }
        }
        if scalar.iter().all(|&s| s == 0.0) {
            let mut z = SpectralField::zeros(n)?;
            z.set_divergence_free(false);
            return Ok(z);
        }
        let f = self.nonlinearity_grid(u);
        let grid = f.map(|g| g.iter().zip(&scalar).map(|(a, b)| a * b).collect());
        SpectralField::from_grid(n, &grid)
    }

    /// `Φ(u)e_j` for a single mode (0-based `j`).
    pub fn mode_field(&self, u: &SpectralField, j: usize) -> Result<SpectralField> {
        if j >= self.modes() {
            return Err(Error::invalid(format!("mode {j} out of range")));
        }
        let n = u.n();
        let wj = self.mode_weight_grid(n, j);
        let f = self.nonlinearity_grid(u);
        let grid = f.map(|g| g.iter().zip(&wj).map(|(a, b)| a * b).collect());
        SpectralField::from_grid(n, &grid)
    }

    /// Hilbert–Schmidt norm `‖Φ(u)‖_{L₂(𝔘; W^{k,2})}` for `k ∈ {0,1,2}`.
    pub fn hs_norm(&self, u: &SpectralField, k: u32) -> Result<f64> {
        if k > 2 {
            return Err(Error::invalid(format!("Sobolev order {k} not in 0..=2")));
        }
        let mut acc = 0.0;
        for j in 0..self.modes() {
            let nj = self.mode_field(u, j)?.sobolev_norm(k)?;
            acc += nj * nj;
        }
        Ok(acc.sqrt())
    }

    /// `‖Φ(u) − Φ(v)‖_{L₂(𝔘; L²)}`.
    pub fn hs_distance(&self, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        u.same_n(v)?;
        let mut acc = 0.0;
        for j in 0..self.modes() {
            let d = self.mode_field(u, j)?.sub(&self.mode_field(v, j)?)?;
            acc += d.sobolev_norm(0)?.powi(2);
        }
        Ok(acc.sqrt())
    }

    /// Upper bound `γ (Σ_j λ_j²)^{1/2}` for the `L²` Lipschitz constant of the
    /// multiplicative family (`|σ_j| ≤ 1`, `sin` is 1-Lipschitz).
    pub fn lipschitz_bound(&self) -> f64 {
        self.config.gamma
            * self
                .basis
                .iter()
                .map(|m| m.amplitude * m.amplitude)
                .sum::<f64>()
                .sqrt()
    }
}

/// Identifies the random stream of one path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedDescriptor {
    pub seed: u64,
    pub path_index: u64,
}

/// One realisation of the truncated Wiener increments `Δ_m β_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    steps: usize,
    tau: f64,
    modes: usize,
    /// `m`-major, `j`-minor.
    increments: Vec<f64>,
    seed: SeedDescriptor,
}

impl NoisePath {
    /// Draw `Δβ[m][j] ~ N(0, τ)` keyed on `(seed, path_index, m, j)`.
    pub fn sample(seed: u64, path_index: u64, steps: usize, tau: f64, modes: usize) -> Result<Self> {
        check_shape(steps, tau, modes)?;
        let scale = tau.sqrt();
        let mut increments = Vec::with_capacity(steps * modes);
        for m in 0..steps {
            for j in 0..modes {
                let counter = ((m as u128) << 32) | j as u128;
                increments.push(scale * rng::gaussian(seed, path_index, counter));
            }
        }
        Ok(Self {
            steps,
            tau,
            modes,
            increments,
            seed: SeedDescriptor { seed, path_index },
        })
    }

    /// Path with all increments zero; makes no random draws.
    pub fn zeros(steps: usize, tau: f64, modes: usize) -> Result<Self> {
        check_shape(steps, tau, modes)?;
        Ok(Self {
            steps,
            tau,
            modes,
            increments: vec![0.0; steps * modes],
            seed: SeedDescriptor {
                seed: 0,
                path_index: 0,
            },
        })
    }

    pub fn from_increments(steps: usize, tau: f64, modes: usize, increments: Vec<f64>) -> Result<Self> {
        check_shape(steps, tau, modes)?;
        if increments.len() != steps * modes {
            return Err(Error::invalid("increment array must have M×J entries"));
        }
        Ok(Self {
            steps,
            tau,
            modes,
            increments,
            seed: SeedDescriptor {
                seed: 0,
                path_index: 0,
            },
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn seed(&self) -> SeedDescriptor {
        self.seed
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increments of step `m` (0-based, i.e. `Δ_{m+1} W`).
    pub fn increment(&self, m: usize) -> &[f64] {
        &self.increments[m * self.modes..(m + 1) * self.modes]
    }

    /// Discrete Brownian path `β_j(t_m)`, `m = 0..=M`, for mode `j`.
    pub fn partial_sums(&self, j: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut acc = 0.0;
        out.push(acc);
        for m in 0..self.steps {
            acc += self.increments[m * self.modes + j];
            out.push(acc);
        }
        out
    }

    /// Merge blocks of `factor` consecutive increments.
    ///
    /// The factor is applied one prime at a time in ascending order, summing
    /// left to right inside each block, so `coarsen(coarsen(p, a), b)` equals
    /// `coarsen(p, a·b)` bit-for-bit whenever `a`'s primes do not exceed `b`'s.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::invalid(format!(
                "coarsening factor {factor} does not divide {} steps",
                self.steps
            )));
        }
        let mut out = self.clone();
        for p in prime_factors(factor) {
            out = out.coarsen_block(p);
        }
        Ok(out)
    }

    fn coarsen_block(&self, p: usize) -> Self {
        let steps = self.steps / p;
        let mut increments = Vec::with_capacity(steps * self.modes);
        for m in 0..steps {
            for j in 0..self.modes {
                let mut acc = self.increments[(m * p) * self.modes + j];
                for q in 1..p {
                    acc += self.increments[(m * p + q) * self.modes + j];
                }
                increments.push(acc);
            }
        }
        Self {
            steps,
            tau: self.tau * p as f64,
            modes: self.modes,
            increments,
            seed: self.seed,
        }
    }

    /// First `steps` increments.
    pub fn truncated(&self, steps: usize) -> Result<Self> {
        if steps == 0 || steps > self.steps {
            return Err(Error::invalid("truncation length out of range"));
        }
        let mut out = self.clone();
        out.steps = steps;
        out.increments.truncate(steps * self.modes);
        Ok(out)
    }

    /// Audit dump: little-endian `f64`, `m`-major, `j`-minor.
    pub fn write_le<W: Write>(&self, mut w: W) -> Result<()> {
        for x in &self.increments {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }
}

fn check_shape(steps: usize, tau: f64, modes: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::invalid("noise path needs at least one step"));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {tau}")));
    }
    if modes == 0 {
        return Err(Error::invalid("noise path needs at least one mode"));
    }
    Ok(())
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

