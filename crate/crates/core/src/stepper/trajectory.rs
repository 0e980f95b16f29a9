use super::{cutoff_zeta, step_with_zeta, StepConfig, Variant};
use crate::noise::{Diffusion, NoisePath};
use crate::spectral::SpectralField;
use crate::{Error, Result};
use std::io::Write;

/// Iterates `u_0..u_M` of one path with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: StepConfig,
    /// `u_0..u_M`; empty when states were not kept.
    pub states: Vec<SpectralField>,
    /// `‖u_m‖_{W^{k,2}}` for `k = 0, 1, 2`.
    pub norms: Vec<[f64; 3]>,
    /// `‖∇^s u_m‖_{L²}` for `s = 1, 2, 3`.
    pub gradients: Vec<[f64; 3]>,
    /// `‖∇^s (u_m − u_{m-1})‖_{L²}` for `s = 0, 1, 2`; entry 0 is zero.
    pub increments: Vec<[f64; 3]>,
    /// Linear solver iterations per step; entry 0 is zero.
    pub iterations: Vec<usize>,
    /// Cutoff factor used in each step; entry 0 is one.
    pub zeta: Vec<f64>,
    /// Discrete stopping index `𝔧_R`.
    pub stop_index: usize,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.norms.len() - 1
    }

    pub fn h2_norms(&self) -> Vec<f64> {
        self.norms.iter().map(|n| n[2]).collect()
    }

    /// `[𝔰_R^d ≤ ℓτ]`, i.e. `𝔧_R ≤ ℓ`.
    pub fn stopped_by(&self, ell: usize) -> bool {
        self.stop_index <= ell
    }
}

/// Smallest `m` with `max_{n≤m} norms[n] ≥ R`, or `M = len − 1` if none.
pub fn discrete_stop_index(norms: &[f64], radius: f64) -> usize {
    assert!(!norms.is_empty(), "norm sequence must contain index 0");
    norms
        .iter()
        .position(|&x| x >= radius)
        .unwrap_or(norms.len() - 1)
}

/// The event `[𝔰_R^d ≤ ℓτ]` for one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRecord {
    pub tau: f64,
    pub radius: f64,
    pub ell: usize,
    pub stopped: bool,
    pub path: u64,
}

pub fn stopping_record(traj: &Trajectory, ell: usize, path: u64) -> StoppingRecord {
    StoppingRecord {
        tau: traj.config.tau,
        radius: traj.config.radius,
        ell,
        stopped: traj.stopped_by(ell),
        path,
    }
}

/// Run `M` steps, keeping every state.
pub fn run_trajectory(
    u0: &SpectralField,
    path: &NoisePath,
    cfg: &StepConfig,
    diffusion: &Diffusion,
) -> Result<Trajectory> {
    run_trajectory_with(u0, path, cfg, diffusion, true, |_, _| {})
}

/// Run `M` steps. `observe(m, u_m)` sees every state including `u_0`; states
/// are stored only when `keep_states` is set.
pub fn run_trajectory_with(
    u0: &SpectralField,
    path: &NoisePath,
    cfg: &StepConfig,
    diffusion: &Diffusion,
    keep_states: bool,
    mut observe: impl FnMut(usize, &SpectralField),
) -> Result<Trajectory> {
    cfg.validate()?;
    if path.steps() != cfg.steps {
        return Err(Error::invalid(format!(
            "noise path has {} steps but the scheme needs {}",
            path.steps(),
            cfg.steps
        )));
    }
    if (path.tau() - cfg.tau).abs() > 1e-12 * cfg.tau {
        return Err(Error::invalid(format!(
            "noise path step {} differs from scheme step {}",
            path.tau(),
            cfg.tau
        )));
    }
    if path.modes() != diffusion.modes() {
        return Err(Error::invalid(format!(
            "noise path has {} modes but the diffusion has {}",
            path.modes(),
            diffusion.modes()
        )));
    }
    if !u0.is_divergence_free() {
        return Err(Error::NotDivergenceFree(u0.divergence_residual()));
    }
    let m_total = cfg.steps;
    let mut traj = Trajectory {
        config: *cfg,
        states: Vec::with_capacity(if keep_states { m_total + 1 } else { 0 }),
        norms: Vec::with_capacity(m_total + 1),
        gradients: Vec::with_capacity(m_total + 1),
        increments: Vec::with_capacity(m_total + 1),
        iterations: Vec::with_capacity(m_total + 1),
        zeta: Vec::with_capacity(m_total + 1),
        stop_index: m_total,
    };
    let record = |traj: &mut Trajectory, u: &SpectralField| {
        let s = u.sobolev_norms();
        traj.norms.push([s[0], s[1], s[2]]);
        traj.gradients.push([u.seminorm(1), u.seminorm(2), u.seminorm(3)]);
    };
    record(&mut traj, u0);
    traj.increments.push([0.0; 3]);
    traj.iterations.push(0);
    traj.zeta.push(1.0);
    observe(0, u0);
    let mut prev = u0.clone();
    if keep_states {
        traj.states.push(u0.clone());
    }
    for m in 1..=m_total {
        let zeta = match cfg.variant {
            Variant::Plain => 1.0,
            Variant::Truncated => cutoff_zeta(traj.norms[m - 1][2], cfg.radius),
        };
        // Φ(u_{m-1})Δ_m W: only the previous state and the m-th increment enter
        let noise = diffusion.apply(&prev, path.increment(m - 1))?;
        let out = step_with_zeta(&prev, &noise, cfg, zeta).map_err(|e| e.at_step(m))?;
        let next = out.state;
        let diff = next.sub(&prev)?;
        traj.increments.push([diff.seminorm(0), diff.seminorm(1), diff.seminorm(2)]);
        record(&mut traj, &next);
        traj.iterations.push(out.iterations);
        traj.zeta.push(zeta);
        observe(m, &next);
        if keep_states {
            traj.states.push(next.clone());
        }
        prev = next;
    }
    traj.stop_index = discrete_stop_index(&traj.h2_norms(), cfg.radius);
    Ok(traj)
}

/// Append summary rows for one path. Columns:
/// `path,m,t,normL2,normH1,normH2,incH1,jR_flag,solver_iters`, where
/// `jR_flag` is 1 while `m ≤ 𝔧_R`.
pub fn write_trajectory_csv<W: Write>(
    writer: &mut csv::Writer<W>,
    path: u64,
    traj: &Trajectory,
) -> Result<()> {
    for m in 0..=traj.steps() {
        let t = m as f64 * traj.config.tau;
        writer.write_record([
            path.to_string(),
            m.to_string(),
            format!("{t:.17e}"),
            format!("{:.17e}", traj.norms[m][0]),
            format!("{:.17e}", traj.norms[m][1]),
            format!("{:.17e}", traj.norms[m][2]),
            format!("{:.17e}", traj.increments[m][1]),
            u8::from(m <= traj.stop_index).to_string(),
            traj.iterations[m].to_string(),
        ])?;
    }
    Ok(())
}

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "path",
    "m",
    "t",
    "normL2",
    "normH1",
    "normH2",
    "incH1",
    "jR_flag",
    "solver_iters",
];
