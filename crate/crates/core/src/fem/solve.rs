use super::element::NQ;
use super::saddle::SaddleSolver;
use super::{FemState, FieldSource, ScalarSource, TaylorHood};
use crate::noise::{Diffusion, NoiseKind, NoisePath};
use crate::stepper::{StepConfig, Variant};
use crate::{Error, Result, SpectralField};
use std::io::Write;

/// Result of the divergence-free `L²` projection.
#[derive(Clone, Debug)]
pub struct Projection {
    pub state: FemState,
    /// Lagrange multiplier of the divergence constraint.
    pub multiplier: Vec<f64>,
    /// `‖v − Π_h v‖_{L²}`.
    pub error_l2: f64,
    /// `‖∇(v − Π_h v)‖_{L²}`.
    pub error_h1: f64,
}

/// `L²`-orthogonal projection onto the discretely divergence-free subspace.
pub fn project_l2_divfree(source: &impl FieldSource, space: &TaylorHood) -> Result<Projection> {
    let (vals, grads) = source.sample(space.quadrature_points());
    let load = space.load_vector(&vals);
    let (u, lambda) = space.projector()?.solve(&load)?;
    let state = FemState::new(space, u, vec![0.0; space.pressure_dofs()])?;
    let (error_l2, error_h1) = error_vs_samples(&state, &vals, &grads, space);
    Ok(Projection {
        state,
        multiplier: lambda,
        error_l2,
        error_h1,
    })
}

/// `L²` projection onto the P1 pressure space; returns the coefficients and
/// the `L²` error.
pub fn project_pressure(source: &impl ScalarSource, space: &TaylorHood) -> Result<(Vec<f64>, f64)> {
    let f = source.sample_scalar(space.quadrature_points());
    let mut load = vec![0.0; space.pressure_dofs()];
    for t in 0..space.mesh().num_tets() {
        let el = &space.local[t % 6];
        let pd = space.tet_pressure_dofs(t);
        for q in 0..NQ {
            let wf = el.weights[q] * f[t * NQ + q];
            for i in 0..4 {
                load[pd[i]] += wf * el.psi[q][i];
            }
        }
    }
    let p = space.pressure_solver()?.solve(&load)?;
    let mut err = 0.0;
    for t in 0..space.mesh().num_tets() {
        let el = &space.local[t % 6];
        let pd = space.tet_pressure_dofs(t);
        for q in 0..NQ {
            let ph: f64 = (0..4).map(|i| p[pd[i]] * el.psi[q][i]).sum();
            err += el.weights[q] * (ph - f[t * NQ + q]).powi(2);
        }
    }
    Ok((p, err.sqrt()))
}

fn error_vs_samples(state: &FemState, vals: &[Vec<f64>; 3], grads: &[Vec<f64>; 9], space: &TaylorHood) -> (f64, f64) {
    let (uv, ug) = space.evaluate(&state.velocity);
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for idx in 0..space.num_quadrature_points() {
        let w = space.quadrature_weight(idx);
        l2 += w * (0..3).map(|c| (uv[c][idx] - vals[c][idx]).powi(2)).sum::<f64>();
        h1 += w * (0..9).map(|a| (ug[a][idx] - grads[a][idx]).powi(2)).sum::<f64>();
    }
    (l2.sqrt(), h1.sqrt())
}

/// `(‖u_h − v‖_{L²}, ‖∇(u_h − v)‖_{L²})` by quadrature.
pub fn error_vs_source(state: &FemState, source: &impl FieldSource, space: &TaylorHood) -> (f64, f64) {
    let (vals, grads) = source.sample(space.quadrature_points());
    error_vs_samples(state, &vals, &grads, space)
}

/// Errors against a spectral field evaluated exactly at the quadrature points.
pub fn error_vs_spectral(state: &FemState, field: &SpectralField, space: &TaylorHood) -> Result<(f64, f64)> {
    if state.velocity.len() != space.velocity_dofs() {
        return Err(Error::invalid("state does not belong to this space"));
    }
    Ok(error_vs_source(state, field, space))
}

/// `(‖a − b‖_{L²}, ‖∇(a − b)‖_{L²})` for two states of the same space.
pub fn error_between(a: &FemState, b: &FemState, space: &TaylorHood) -> (f64, f64) {
    let d: Vec<f64> = a.velocity.iter().zip(&b.velocity).map(|(x, y)| x - y).collect();
    (space.l2_norm(&d), space.grad_norm(&d))
}

/// Noise weights `γ λ_j σ_j` at the quadrature points of one space.
pub struct FemNoise {
    diffusion: Diffusion,
    weights: Vec<Vec<f64>>,
}

impl FemNoise {
    pub fn new(diffusion: &Diffusion, space: &TaylorHood) -> Self {
        let lattice = space.quadrature_points();
        let points: Vec<[f64; 3]> = (0..lattice.len()).map(|i| lattice.point(i)).collect();
        Self {
            diffusion: diffusion.clone(),
            weights: diffusion.mode_weights(&points),
        }
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    /// Values of `Φ(u_h)ΔW` at the quadrature points.
    pub fn field(&self, u: &FemState, increments: &[f64], space: &TaylorHood) -> Result<[Vec<f64>; 3]> {
        if increments.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "expected {} noise increments, got {}",
                self.weights.len(),
                increments.len()
            )));
        }
        let npts = space.num_quadrature_points();
        if self.weights.first().is_some_and(|w| w.len() != npts) {
            return Err(Error::invalid("noise weights belong to a different space"));
        }
        let mut s = vec![0.0; npts];
        for (w, &db) in self.weights.iter().zip(increments) {
            if db != 0.0 {
                s.iter_mut().zip(w).for_each(|(a, b)| *a += db * b);
            }
        }
        Ok(match self.diffusion.config().kind {
            NoiseKind::Additive => {
                let f = self.diffusion.nonlinearity([0.0; 3]);
                std::array::from_fn(|c| s.iter().map(|x| x * f[c]).collect())
            }
            NoiseKind::Multiplicative => {
                let (uv, _) = space.evaluate(&u.velocity);
                let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; npts]);
                for idx in 0..npts {
                    let f = self.diffusion.nonlinearity([uv[0][idx], uv[1][idx], uv[2][idx]]);
                    for c in 0..3 {
                        out[c][idx] = s[idx] * f[c];
                    }
                }
                out
            }
        })
    }
}

/// Result of one FEM step.
#[derive(Clone, Debug)]
pub struct FemStepOutcome {
    pub state: FemState,
    /// Lagrange multiplier of the divergence constraint (the discrete pressure).
    pub pressure: Vec<f64>,
}

/// One step of the fully discrete scheme:
/// `(M + τμA + τC(u_prev)) u + Bᵀp = M u_prev + ∫ Φ(u_prev)ΔW·φ`, `B u = 0`.
pub fn step_fem(
    u_prev: &FemState,
    increments: &[f64],
    noise: &FemNoise,
    cfg: &StepConfig,
    space: &TaylorHood,
) -> Result<FemStepOutcome> {
    cfg.validate()?;
    if cfg.variant != Variant::Plain {
        return Err(Error::invalid("the finite element scheme has no truncated variant"));
    }
    if u_prev.velocity.len() != space.velocity_dofs() {
        return Err(Error::invalid("state does not belong to this space"));
    }
    if !u_prev.is_divergence_free() {
        return Err(Error::NotDivergenceFree(u_prev.divergence_residual(space)));
    }
    let conv = space.assemble_convection(&u_prev.velocity)?;
    let k = space
        .mass()
        .combine(1.0, space.stiffness(), cfg.tau * cfg.mu)?
        .combine(1.0, &conv, cfg.tau)?;
    let solver = SaddleSolver::new(space, &k)?;
    let ns = space.scalar_dofs();
    let mut load = Vec::with_capacity(3 * ns);
    for c in 0..3 {
        load.extend(space.mass().matvec(space.component(&u_prev.velocity, c)));
    }
    if !noise.diffusion().is_zero() && increments.iter().any(|&x| x != 0.0) {
        let f = noise.field(u_prev, increments, space)?;
        let nl = space.load_vector(&f);
        load.iter_mut().zip(&nl).for_each(|(a, b)| *a += b);
    } else if increments.len() != noise.diffusion().modes() {
        return Err(Error::invalid(format!(
            "expected {} noise increments, got {}",
            noise.diffusion().modes(),
            increments.len()
        )));
    }
    let (u, p) = solver.solve(&load)?;
    let state = FemState::new(space, u, vec![0.0; space.pressure_dofs()])?;
    Ok(FemStepOutcome { state, pressure: p })
}

/// Run up to `steps` FEM steps from `u0` with the increments of `path`,
/// calling `observe(m, u_{h,m})` for `m = 0..=steps`. Returns the last state.
pub fn run_fem_trajectory(
    u0: &FemState,
    path: &NoisePath,
    steps: usize,
    cfg: &StepConfig,
    noise: &FemNoise,
    space: &TaylorHood,
    mut observe: impl FnMut(usize, &FemState) -> Result<()>,
) -> Result<FemState> {
    if steps > path.steps() {
        return Err(Error::invalid(format!(
            "asked for {steps} steps but the noise path has {}",
            path.steps()
        )));
    }
    if (path.tau() - cfg.tau).abs() > 1e-12 * cfg.tau {
        return Err(Error::invalid(format!(
            "noise path step {} differs from scheme step {}",
            path.tau(),
            cfg.tau
        )));
    }
    let mut u = u0.clone();
    observe(0, &u)?;
    for m in 1..=steps {
        let out = step_fem(&u, path.increment(m - 1), noise, cfg, space).map_err(|e| e.at_step(m))?;
        if !out.state.is_divergence_free() {
            return Err(Error::Factorization {
                step: Some(m),
                reason: format!(
                    "iterate lost the divergence constraint (residual {:e})",
                    out.state.divergence_residual(space)
                ),
            });
        }
        u = out.state;
        observe(m, &u)?;
    }
    Ok(u)
}

/// Column names of the FEM error table.
pub const FEM_ERROR_HEADER: [&str; 6] = ["path", "m", "h", "n", "errL2", "errH1"];

/// One row of the FEM error table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FemErrorRow {
    pub path: u64,
    pub m: usize,
    pub h: f64,
    pub n: usize,
    pub err_l2: f64,
    pub err_h1: f64,
}

pub fn write_fem_error_csv<W: Write>(writer: W, rows: &[FemErrorRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FEM_ERROR_HEADER)?;
    for r in rows {
        w.write_record([
            r.path.to_string(),
            r.m.to_string(),
            format!("{:.17e}", r.h),
            r.n.to_string(),
            format!("{:.17e}", r.err_l2),
            format!("{:.17e}", r.err_h1),
        ])?;
    }
    w.flush()?;
    Ok(())
}
