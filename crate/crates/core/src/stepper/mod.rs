//! Semi-implicit Euler–Maruyama time stepping for the spectral backend.
//!
//! One step solves, on the dealiased divergence-free band,
//!
//! ```text
//! u_m + τζ P[(u_{m-1}·∇)u_m] − τμΔu_m = P[u_{m-1} + ζ Φ(u_{m-1})Δ_m W]
//! ```
//!
//! with `P` the Leray projector followed by the band restriction. The plain
//! scheme has `ζ = 1`; the truncated scheme uses `ζ = ζ_R(‖u_{m-1}‖_{W^{2,2}})`.

mod diagnostics;
pub mod gmres;
mod trajectory;

pub use diagnostics::{discrete_pressure, l2_statistic, moment_report, Estimate, MomentReport};
pub use trajectory::{
    discrete_stop_index, run_trajectory, run_trajectory_with, stopping_record, write_trajectory_csv,
    StoppingRecord, Trajectory, TRAJECTORY_HEADER,
};

use crate::spectral::{dealias_cutoff, leray_in_place, modes, Convector, SpectralField};
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Truncated,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "truncated" => Ok(Self::Truncated),
            other => Err(Error::Config(format!("unknown scheme variant `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    /// Viscosity `μ`.
    pub mu: f64,
    /// Step size `τ`.
    pub tau: f64,
    /// Number of steps `M`; the final time is `τM`.
    pub steps: usize,
    /// Truncation radius `R`; `f64::INFINITY` disables stopping.
    pub radius: f64,
    pub variant: Variant,
    /// Relative residual tolerance of the linear solve.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            tau: 1.0 / 16.0,
            steps: 16,
            radius: f64::INFINITY,
            variant: Variant::Plain,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl StepConfig {
    pub fn new(mu: f64, tau: f64, steps: usize) -> Self {
        Self {
            mu,
            tau,
            steps,
            ..Self::default()
        }
    }

    pub fn final_time(&self) -> f64 {
        self.tau * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::invalid(format!("viscosity must be positive, got {}", self.mu)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.tau)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::invalid(format!("solver tolerance must lie in (0, 1e-6], got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("solver needs at least one iteration"));
        }
        Ok(())
    }
}

/// Smooth cutoff `ζ_R(x)`: 1 on `[0, R]`, 0 on `[2R, ∞)`, quintic smoothstep
/// in between (C² at both seams).
pub fn cutoff_zeta(x: f64, radius: f64) -> f64 {
    if x <= radius {
        return 1.0;
    }
    if x >= 2.0 * radius {
        return 0.0;
    }
    let t = (x - radius) / radius;
    1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// Result of one linear solve.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: SpectralField,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    /// Cutoff factor applied to convection and noise.
    pub zeta: f64,
}

/// The linear system of one step with `u_{m-1}` frozen.
pub struct StepSystem {
    n: usize,
    kmax: usize,
    tau: f64,
    zeta: f64,
    tol: f64,
    max_iter: usize,
    /// `1 + τμ|k|²` per mode.
    diag: Vec<f64>,
    u_prev: SpectralField,
    convector: Option<Convector>,
}

impl StepSystem {
    pub fn new(u_prev: &SpectralField, cfg: &StepConfig, zeta: f64) -> Result<Self> {
        cfg.validate()?;
        if !(0.0..=1.0).contains(&zeta) {
            return Err(Error::invalid(format!("cutoff factor must lie in [0, 1], got {zeta}")));
        }
        let n = u_prev.n();
        let table = modes(n);
        let diag = table.k2.iter().map(|k2| 1.0 + cfg.tau * cfg.mu * k2).collect();
        let convector = (zeta != 0.0).then(|| Convector::new(u_prev));
        Ok(Self {
            n,
            kmax: dealias_cutoff(n),
            tau: cfg.tau,
            zeta,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            diag,
            u_prev: u_prev.clone(),
            convector,
        })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Right-hand side `P[u_{m-1} + ζ·noise]`.
    pub fn rhs(&self, noise: &SpectralField) -> Result<SpectralField> {
        self.u_prev.same_n(noise)?;
        let mut coeffs = self.u_prev.all_coeffs().clone();
        for (c, nc) in coeffs.iter_mut().zip(noise.all_coeffs()) {
            for (a, b) in c.iter_mut().zip(nc) {
                *a += self.zeta * b;
            }
        }
        self.project(&mut coeffs);
        SpectralField::from_coeffs(self.n, coeffs)
    }

    /// Convection part `τζ P[(u_{m-1}·∇)v]` of the operator.
    pub fn convection(&self, v: &SpectralField) -> Result<SpectralField> {
        self.u_prev.same_n(v)?;
        let mut coeffs: [Vec<Complex64>; 3] = v.band_limited(self.kmax).all_coeffs().clone();
        match &self.convector {
            Some(conv) => {
                coeffs = conv.apply_coeffs(&coeffs);
                self.project(&mut coeffs);
                for c in coeffs.iter_mut() {
                    c.iter_mut().for_each(|z| *z *= self.tau * self.zeta);
                }
            }
            None => coeffs.iter_mut().for_each(|c| c.fill(Complex64::default())),
        }
        let mut out = SpectralField::from_coeffs(self.n, coeffs)?;
        out.set_divergence_free(true);
        Ok(out)
    }

    /// Full operator `v ↦ (1 − τμΔ)v + τζ P[(u_{m-1}·∇)v]` on band-limited `v`.
    pub fn apply(&self, v: &SpectralField) -> Result<SpectralField> {
        self.u_prev.same_n(v)?;
        let mut x = v.band_limited(self.kmax).all_coeffs().clone();
        self.project(&mut x);
        let out = self.apply_flat(&flatten(&x));
        SpectralField::from_coeffs(self.n, unflatten(self.n, out))
    }

    fn project(&self, coeffs: &mut [Vec<Complex64>; 3]) {
        leray_in_place(self.n, coeffs);
        crate::spectral::band_limit_in_place(self.n, self.kmax, coeffs);
    }

    fn apply_flat(&self, x: &[Complex64]) -> Vec<Complex64> {
        let len = self.n.pow(3);
        let mut out: Vec<Complex64> = x
            .iter()
            .enumerate()
            .map(|(i, z)| z * self.diag[i % len])
            .collect();
        if let Some(conv) = &self.convector {
            let mut cv = conv.apply_coeffs(&unflatten(self.n, x.to_vec()));
            self.project(&mut cv);
            let s = self.tau * self.zeta;
            for (o, z) in out.iter_mut().zip(cv.iter().flatten()) {
                *o += s * z;
            }
        }
        out
    }

    /// Solve `A u = b` for a projected right-hand side.
    pub fn solve(&self, rhs: &SpectralField) -> Result<(SpectralField, usize, f64)> {
        let len = self.n.pow(3);
        let b = flatten(rhs.all_coeffs());
        let precond = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter().enumerate().map(|(i, z)| z / self.diag[i % len]).collect()
        };
        let report = gmres::solve(
            |v| self.apply_flat(v),
            precond,
            &b,
            self.tol,
            self.max_iter,
        );
        if !report.converged {
            return Err(Error::SolverDiverged {
                step: None,
                iterations: report.iterations,
                residual: report.residual,
            });
        }
        let mut coeffs = unflatten(self.n, report.x);
        // remove the roundoff component outside the divergence-free band
        self.project(&mut coeffs);
        let mut state = SpectralField::from_coeffs(self.n, coeffs)?;
        state.set_divergence_free(true);
        Ok((state, report.iterations, report.residual))
    }
}

fn flatten(c: &[Vec<Complex64>; 3]) -> Vec<Complex64> {
    c.iter().flatten().copied().collect()
}

fn unflatten(n: usize, mut v: Vec<Complex64>) -> [Vec<Complex64>; 3] {
    let len = n * n * n;
    let c = v.split_off(2 * len);
    let b = v.split_off(len);
    [v, b, c]
}

fn check_inputs(u_prev: &SpectralField, noise: &SpectralField) -> Result<()> {
    u_prev.same_n(noise)?;
    let r = u_prev.divergence_residual();
    if r > 1e-10 {
        return Err(Error::NotDivergenceFree(r));
    }
    Ok(())
}

pub(crate) fn step_with_zeta(
    u_prev: &SpectralField,
    noise: &SpectralField,
    cfg: &StepConfig,
    zeta: f64,
) -> Result<StepOutcome> {
    check_inputs(u_prev, noise)?;
    let system = StepSystem::new(u_prev, cfg, zeta)?;
    let rhs = system.rhs(noise)?;
    let (state, iterations, residual) = system.solve(&rhs)?;
    Ok(StepOutcome {
        state,
        iterations,
        residual,
        zeta,
    })
}

/// One step of the plain semi-implicit scheme. `noise` is `Φ(u_{m-1})Δ_m W`.
pub fn step_semi_implicit(u_prev: &SpectralField, noise: &SpectralField, cfg: &StepConfig) -> Result<StepOutcome> {
    step_with_zeta(u_prev, noise, cfg, 1.0)
}

/// One step of the truncated scheme, with `ζ_R` evaluated at `‖u_{m-1}‖_{W^{2,2}}`.
pub fn step_truncated(u_prev: &SpectralField, noise: &SpectralField, cfg: &StepConfig) -> Result<StepOutcome> {
    let zeta = cutoff_zeta(u_prev.sobolev_norm(2)?, cfg.radius);
    step_with_zeta(u_prev, noise, cfg, zeta)
}

/// Dispatch on `cfg.variant`.
pub fn step(u_prev: &SpectralField, noise: &SpectralField, cfg: &StepConfig) -> Result<StepOutcome> {
    match cfg.variant {
        Variant::Plain => step_semi_implicit(u_prev, noise, cfg),
        Variant::Truncated => step_truncated(u_prev, noise, cfg),
    }
}

