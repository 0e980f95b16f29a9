use super::Trajectory;
use crate::noise::Diffusion;
use crate::spectral::{div_div_product, PressureParts, SpectralField};
use crate::stats::{mean, standard_error};
use crate::{Error, Result};

/// Discrete pressure of one step: `π_m^det = −Δ⁻¹ div div(u_m ⊗ u_{m-1})`
/// and `Φ^π_{m-1} = −∇Δ⁻¹ div Φ(u_{m-1})`.
pub fn discrete_pressure(u_m: &SpectralField, u_prev: &SpectralField, diffusion: &Diffusion) -> Result<PressureParts> {
    crate::spectral::require_solenoidal(u_m)?;
    crate::spectral::require_solenoidal(u_prev)?;
    let deterministic = div_div_product(u_m, u_prev)?.inv_laplacian()?.scaled(-1.0);
    let noise = (0..diffusion.modes())
        .map(|j| {
            diffusion
                .mode_field(u_prev, j)
                .map(|f| crate::spectral::noise_pressure(&f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureParts {
        deterministic,
        noise,
    })
}

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn of(xs: &[f64]) -> Self {
        Self {
            mean: mean(xs),
            se: standard_error(xs),
        }
    }
}

/// Moment diagnostics over a set of paths sharing one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub q: u32,
    pub paths: usize,
    /// `E[max_m ‖u_m‖^p + τ Σ_m ‖u_m‖^{p−2} ‖∇u_m‖²]`, `p = 2^q`, over all steps.
    pub l2: Estimate,
    /// `W^{1,2}` analogue up to `𝔧_R`, including the increment sum.
    pub h1: Estimate,
    /// `W^{2,2}` analogue up to `𝔧_R`, including the increment sum.
    pub h2: Estimate,
    /// `E[(Σ_{m≤𝔧_R} ‖∇(u_m − u_{m-1})‖²)^q]`.
    pub increment: Estimate,
    /// Mean of the per-path energy bound `‖u_0‖^p (1 + 1/(2μ))` that caps the
    /// `L²` statistic when there is no noise.
    pub energy_bound: f64,
}

/// Per-path value of the `L²` moment statistic.
pub fn l2_statistic(traj: &Trajectory, q: u32) -> f64 {
    let p = 2f64.powi(q as i32);
    let tau = traj.config.tau;
    let m_total = traj.steps();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for m in 1..=m_total {
        let l2 = traj.norms[m][0];
        max = max.max(l2.powf(p));
        sum += tau * l2.powf(p - 2.0) * traj.gradients[m][0].powi(2);
    }
    max + sum
}

fn stopped_statistic(traj: &Trajectory, q: u32, order: usize) -> f64 {
    let p = 2f64.powi(q as i32);
    let tau = traj.config.tau;
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for m in 1..=traj.stop_index {
        let w = traj.norms[m][order];
        max = max.max(w.powf(p));
        let weight = w.powf(p - 2.0);
        sum += tau * weight * traj.gradients[m][order].powi(2);
        sum += weight * traj.increments[m][order].powi(2);
    }
    max + sum
}

pub fn moment_report(trajectories: &[Trajectory], q: u32) -> Result<MomentReport> {
    if trajectories.is_empty() {
        return Err(Error::invalid("moment report needs at least one trajectory"));
    }
    if q == 0 {
        return Err(Error::invalid("moment order q must be at least 1"));
    }
    let cfg = trajectories[0].config;
    if trajectories.iter().any(|t| t.config != cfg) {
        return Err(Error::invalid("trajectories do not share a configuration"));
    }
    let p = 2f64.powi(q as i32);
    let l2: Vec<f64> = trajectories.iter().map(|t| l2_statistic(t, q)).collect();
    let h1: Vec<f64> = trajectories.iter().map(|t| stopped_statistic(t, q, 1)).collect();
    let h2: Vec<f64> = trajectories.iter().map(|t| stopped_statistic(t, q, 2)).collect();
    let inc: Vec<f64> = trajectories
        .iter()
        .map(|t| {
            let s: f64 = (1..=t.stop_index).map(|m| t.increments[m][1].powi(2)).sum();
            s.powi(q as i32)
        })
        .collect();
    let bounds: Vec<f64> = trajectories
        .iter()
        .map(|t| t.norms[0][0].powf(p) * (1.0 + 0.5 / cfg.mu))
        .collect();
    Ok(MomentReport {
        q,
        paths: trajectories.len(),
        l2: Estimate::of(&l2),
        h1: Estimate::of(&h1),
        h2: Estimate::of(&h2),
        increment: Estimate::of(&inc),
        energy_bound: mean(&bounds),
    })
}
