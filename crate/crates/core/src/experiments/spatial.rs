use super::{diffusion_for, initial_field, noise_path, summarise, ErrorRow, ErrorStudy, RunConfig};
use crate::fem::{error_vs_spectral, project_l2_divfree, run_fem_trajectory, FemErrorRow, FemNoise, TaylorHood};
use crate::stepper::{run_trajectory_with, StepConfig, Variant};
use crate::{Error, Result};

/// Spatial study: ladder summary plus the per-step FEM error rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialStudy {
    pub study: ErrorStudy,
    pub steps: Vec<FemErrorRow>,
}

/// Spectral time-discrete reference against FEM trajectories over a mesh
/// ladder, with shared noise and `𝔧_R` taken from the spectral run.
pub fn run_spatial_study(cfg: &RunConfig) -> Result<SpatialStudy> {
    cfg.validate()?;
    let mut ladder = cfg.n_ladder.clone();
    ladder.sort_unstable();
    ladder.dedup();
    if ladder.len() < 3 {
        return Err(Error::Config(format!("spatial study needs at least 3 mesh levels, got {}", ladder.len())));
    }
    let n_max = *ladder.last().expect("nonempty ladder");
    if cfg.n_ref < 4 * n_max {
        return Err(Error::Config(format!(
            "reference resolution {} is too coarse for mesh level {n_max} (need at least {})",
            cfg.n_ref,
            4 * n_max
        )));
    }
    if cfg.paths < 8 {
        return Err(Error::Config(format!("spatial study needs at least 8 paths, got {}", cfg.paths)));
    }
    let steps = cfg.steps_for(cfg.tau)?;
    let scfg = StepConfig {
        radius: cfg.radius,
        variant: Variant::Plain,
        ..StepConfig::new(cfg.mu, cfg.tau, steps)
    };
    let u0 = initial_field(cfg, cfg.n_ref)?;
    let diffusion = diffusion_for(cfg)?;
    let spaces: Vec<TaylorHood> = ladder.iter().map(|&n| TaylorHood::new(n)).collect::<Result<_>>()?;
    let noises: Vec<FemNoise> = spaces.iter().map(|s| FemNoise::new(&diffusion, s)).collect();
    let starts = spaces
        .iter()
        .map(|s| project_l2_divfree(&u0, s).map(|p| p.state))
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = spaces.iter().map(|s| s.h()).collect();

    // Without noise every path is the same computation; run it once.
    let distinct = if diffusion.is_zero() { 1 } else { cfg.paths };
    let mut rows = Vec::with_capacity(cfg.paths * ladder.len());
    let mut step_rows = Vec::new();
    for p in 0..distinct as u64 {
        let path = noise_path(cfg, &diffusion, p, steps, cfg.tau)?;
        let reference = run_trajectory_with(&u0, &path, &scfg, &diffusion, true, |_, _| {})?;
        let stop = reference.stop_index;
        for (level, space) in spaces.iter().enumerate() {
            let mut max_l2 = 0.0f64;
            let mut grad_sum = 0.0;
            run_fem_trajectory(&starts[level], &path, stop, &scfg, &noises[level], space, |m, u| {
                let (l2, h1) = error_vs_spectral(u, &reference.states[m], space)?;
                max_l2 = max_l2.max(l2 * l2);
                if m > 0 {
                    grad_sum += cfg.tau * h1 * h1;
                }
                step_rows.push(FemErrorRow {
                    path: p,
                    m,
                    h: space.h(),
                    n: space.n(),
                    err_l2: l2,
                    err_h1: h1,
                });
                Ok(())
            })?;
            rows.push(ErrorRow {
                path: p,
                level,
                param: space.h(),
                size: space.n(),
                max_l2,
                grad_sum,
                stop_index: stop,
                exceeds: false,
            });
        }
    }
    if distinct < cfg.paths {
        let template = rows.clone();
        let template_steps = step_rows.clone();
        for p in 1..cfg.paths as u64 {
            rows.extend(template.iter().map(|r| ErrorRow { path: p, ..*r }));
            step_rows.extend(template_steps.iter().map(|r| FemErrorRow { path: p, ..*r }));
        }
    }
    let study = summarise("spatial", rows, &hs, cfg.beta, cfg.xi)?;
    Ok(SpatialStudy { study, steps: step_rows })
}
