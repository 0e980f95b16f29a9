use super::{diffusion_for, initial_field, noise_path, RunConfig};
use crate::stats::{proportion_se, wilson_interval};
use crate::stepper::{run_trajectory_with, StepConfig, Variant};
use crate::{Error, Result};
use rayon::prelude::*;

/// Empirical `P[𝔰_R^d ≤ ℓτ]` at one step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingCell {
    pub tau: f64,
    pub radius: f64,
    pub ell: usize,
    pub paths: usize,
    pub stopped: usize,
    pub p: f64,
    pub se: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoppingStudy {
    /// One cell per ladder step, coarse to fine.
    pub cells: Vec<StoppingCell>,
    /// `p_{i+1} ≤ p_i + 2·sqrt(se_i² + se_{i+1}²)` for every consecutive pair.
    pub non_increasing: bool,
}

/// Monte Carlo estimate of the stopping probability along the `τ` ladder.
///
/// The event only depends on `u_0..u_ℓ`, so each path runs `min(ℓ, M)`
/// truncated steps. When `M ≤ ℓ` the event holds trivially because
/// `𝔧_R ≤ M`.
pub fn run_stopping_study(cfg: &RunConfig) -> Result<StoppingStudy> {
    cfg.validate()?;
    if cfg.paths < 32 {
        return Err(Error::Config(format!("stopping study needs at least 32 paths, got {}", cfg.paths)));
    }
    let (ladder, _, _) = cfg.nested_ladder(2)?;
    let u0 = initial_field(cfg, cfg.n_ref)?;
    let diffusion = diffusion_for(cfg)?;
    let tau0 = ladder[0];
    let mut cells = Vec::with_capacity(ladder.len());
    for &tau in &ladder {
        let total = cfg.steps_for(tau)?;
        let radius = cfg.radius_at(tau, tau0);
        let run = total.min(cfg.ell);
        let scfg = StepConfig {
            radius,
            variant: Variant::Truncated,
            ..StepConfig::new(cfg.mu, tau, run)
        };
        let flags: Vec<bool> = (0..cfg.paths as u64)
            .into_par_iter()
            .map(|p| -> Result<bool> {
                if total <= cfg.ell {
                    return Ok(true);
                }
                let path = noise_path(cfg, &diffusion, p, run, tau)?;
                let traj = run_trajectory_with(&u0, &path, &scfg, &diffusion, false, |_, _| {})?;
                Ok(traj.norms.iter().any(|n| n[2] >= radius))
            })
            .collect::<Result<_>>()?;
        let stopped = flags.iter().filter(|&&s| s).count();
        let (lo, hi) = wilson_interval(stopped, cfg.paths, 1.96);
        cells.push(StoppingCell {
            tau,
            radius,
            ell: cfg.ell,
            paths: cfg.paths,
            stopped,
            p: stopped as f64 / cfg.paths as f64,
            se: proportion_se(stopped, cfg.paths),
            wilson_lo: lo,
            wilson_hi: hi,
        });
    }
    let non_increasing = cells
        .windows(2)
        .all(|w| w[1].p <= w[0].p + 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
    Ok(StoppingStudy { cells, non_increasing })
}
