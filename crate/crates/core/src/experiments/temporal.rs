use super::{diffusion_for, initial_field, noise_path, summarise, ErrorRow, ErrorStudy, RunConfig};
use crate::noise::Diffusion;
use crate::stepper::{run_trajectory_with, StepConfig, Variant};
use crate::{Error, Result, SpectralField};
use rayon::prelude::*;

fn step_config(cfg: &RunConfig, tau: f64, steps: usize, radius: f64) -> StepConfig {
    StepConfig {
        radius,
        variant: Variant::Plain,
        ..StepConfig::new(cfg.mu, tau, steps)
    }
}

/// Error rows of one path against its fine reference, one per ladder level.
///
/// The reference runs at the finest step with the path's own increments;
/// every level uses the same increments summed over its step. The stop index
/// `m*` is the smaller of the level's own `𝔧_R` and the reference's `𝔧_R`
/// mapped to the level's grid (the last level time not after it).
pub fn temporal_path_rows(
    cfg: &RunConfig,
    u0: &SpectralField,
    diffusion: &Diffusion,
    ladder: &[f64],
    factors: &[usize],
    path_index: u64,
) -> Result<Vec<ErrorRow>> {
    let finest = *ladder.last().ok_or_else(|| Error::Config("empty tau ladder".into()))?;
    let tau0 = ladder[0];
    let m_ref = cfg.steps_for(finest)?;
    let path = noise_path(cfg, diffusion, path_index, m_ref, finest)?;
    let ref_cfg = step_config(cfg, finest, m_ref, cfg.radius_at(finest, tau0));
    let reference = run_trajectory_with(u0, &path, &ref_cfg, diffusion, true, |_, _| {})?;
    let mut rows = Vec::with_capacity(ladder.len());
    for (level, (&tau, &f)) in ladder.iter().zip(factors).enumerate() {
        let coarse_path = path.coarsen(f)?;
        let steps = coarse_path.steps();
        let lcfg = step_config(cfg, tau, steps, cfg.radius_at(tau, tau0));
        let mut max_l2 = 0.0f64;
        let mut grads = Vec::with_capacity(steps + 1);
        let mut failure = None;
        let traj = run_trajectory_with(u0, &coarse_path, &lcfg, diffusion, false, |m, u| {
            match u.sub(&reference.states[m * f]) {
                Ok(d) => grads.push((d.seminorm(0).powi(2), d.seminorm(1).powi(2))),
                Err(e) => failure = Some(e),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let stop = traj.stop_index.min(reference.stop_index / f);
        let mut grad_sum = 0.0;
        for (l2, _) in &grads[..=stop] {
            max_l2 = max_l2.max(*l2);
        }
        for (_, g) in &grads[1..=stop] {
            grad_sum += tau * g;
        }
        rows.push(ErrorRow {
            path: path_index,
            level,
            param: tau,
            size: steps,
            max_l2,
            grad_sum,
            stop_index: stop,
            exceeds: false,
        });
    }
    Ok(rows)
}

/// Strong self-convergence study in `τ` with coupled noise.
pub fn run_temporal_study(cfg: &RunConfig) -> Result<ErrorStudy> {
    cfg.validate()?;
    let (ladder, factors, _) = cfg.nested_ladder(3)?;
    if cfg.paths < 8 {
        return Err(Error::Config(format!("temporal study needs at least 8 paths, got {}", cfg.paths)));
    }
    let u0 = initial_field(cfg, cfg.n_ref)?;
    let diffusion = diffusion_for(cfg)?;
    let per_path: Vec<Vec<ErrorRow>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| temporal_path_rows(cfg, &u0, &diffusion, &ladder, &factors, p))
        .collect::<Result<_>>()?;
    let rows: Vec<ErrorRow> = per_path.into_iter().flatten().collect();
    summarise("temporal", rows, &ladder, cfg.alpha, cfg.xi)
}
