use super::{diffusion_for, initial_field, noise_path, InitialKind, RunConfig};
use crate::fem::{
    error_between, infsup_constant, project_l2_divfree, step_fem, FemNoise, FemState, FieldSource, TaylorHood,
};
use crate::noise::rng::thread_draw_count;
use crate::noise::{Diffusion, DiffusionConfig, NoiseKind, NoisePath};
use crate::spectral::{random_solenoidal, LatticeSpec};
use crate::stepper::{moment_report, run_trajectory, StepConfig, Trajectory, Variant};
use crate::{Result, ScalarSpectralField, SpectralField, VOLUME};

/// How a measured value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `value ≤ threshold`, where the threshold is a numerical tolerance that
    /// `tol_override` replaces.
    Tolerance,
    /// `value ≤ threshold` for a fixed analytic bound.
    AtMost,
    /// `value ≥ threshold`.
    AtLeast,
}

/// One measured invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, threshold: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::Tolerance | Bound::AtMost => value <= threshold,
            Bound::AtLeast => value >= threshold,
        };
        Self {
            name: name.to_string(),
            value,
            threshold,
            bound,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Suite {
    tol_override: Option<f64>,
    checks: Vec<Check>,
}

impl Suite {
    fn tol(&mut self, name: &str, value: f64, tol: f64) {
        let t = self.tol_override.unwrap_or(tol);
        self.checks.push(Check::new(name, value, t, Bound::Tolerance));
    }

    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::new(name, value, bound, Bound::AtMost));
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check::new(name, value, bound, Bound::AtLeast));
    }
}

fn rel(d: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Run every module-level invariant at small fixed sizes. Only `seed`,
/// `noise` and `tol_override` of the configuration are used.
pub fn run_invariant_suite(cfg: &RunConfig) -> Result<InvariantReport> {
    let mut s = Suite {
        tol_override: cfg.tol_override,
        checks: Vec::new(),
    };
    spectral_checks(&mut s)?;
    deterministic_checks(&mut s)?;
    fem_checks(&mut s)?;
    zero_noise_audit(&mut s, cfg)?;
    noise_checks(&mut s, cfg)?;
    stepper_noise_checks(&mut s, cfg)?;
    Ok(InvariantReport { checks: s.checks })
}

fn spectral_checks(s: &mut Suite) -> Result<()> {
    let n = 16;
    let grid_fn = |x: [f64; 3]| {
        [
            (x[0] + 2.0 * x[1]).sin() + x[2].cos(),
            (3.0 * x[2]).cos() * x[0].sin(),
            (x[1] - x[2]).sin(),
        ]
    };
    let v = SpectralField::from_fn(n, grid_fn)?;
    let pv = v.leray_project();
    let ppv = pv.leray_project();
    s.tol("leray_idempotence", rel(ppv.sub(&pv)?.seminorm(0), pv.seminorm(0)), 1e-11);
    s.tol("leray_divergence", pv.divergence_residual(), 1e-11);

    let phi = ScalarSpectralField::from_fn(n, |x| (x[0] + x[1]).sin() + (2.0 * x[2]).cos() * x[1].cos())?;
    let g = phi.gradient();
    s.tol("leray_annihilates_gradients", rel(g.leray_project().seminorm(0), g.seminorm(0)), 1e-11);

    let f = ScalarSpectralField::from_fn(n, |x| (x[0] - x[2]).cos() + (3.0 * x[1]).sin())?;
    let left = f.inv_laplacian()?.laplacian();
    let right = f.laplacian().inv_laplacian()?;
    let scale = f.coeff_norm();
    s.tol("inverse_laplacian_left", rel(left.sub(&f)?.coeff_norm(), scale), 1e-11);
    s.tol("inverse_laplacian_right", rel(right.sub(&f)?.coeff_norm(), scale), 1e-11);

    let grid = v.to_grid();
    let back = SpectralField::from_grid(n, &grid)?;
    s.tol("parseval_round_trip", rel(back.sub(&v)?.seminorm(0), v.seminorm(0)), 1e-11);
    let grid_l2 = (VOLUME / (n * n * n) as f64 * grid.iter().flatten().map(|x| x * x).sum::<f64>()).sqrt();
    s.tol("parseval_norm", rel((grid_l2 - v.seminorm(0)).abs(), v.seminorm(0)), 1e-11);
    Ok(())
}

fn zero_diffusion() -> Result<Diffusion> {
    Diffusion::new(DiffusionConfig {
        gamma: 0.0,
        ..DiffusionConfig::default()
    })
}

/// `max_m (‖u_m‖² + Σ‖u_n − u_{n−1}‖² + 2μτ Σ‖∇u_n‖² − ‖u_0‖²) / ‖u_0‖²`.
fn energy_defect(traj: &Trajectory) -> f64 {
    let cfg = traj.config;
    let e0 = traj.norms[0][0].powi(2);
    let mut acc = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for m in 1..=traj.steps() {
        acc += traj.increments[m][0].powi(2) + 2.0 * cfg.mu * cfg.tau * traj.gradients[m][0].powi(2);
        worst = worst.max(traj.norms[m][0].powi(2) + acc - e0);
    }
    rel(worst.max(0.0), e0)
}

fn deterministic_checks(s: &mut Suite) -> Result<()> {
    let d = zero_diffusion()?;
    let cfg = StepConfig::new(0.5, 1.0 / 16.0, 16);
    let path = NoisePath::zeros(cfg.steps, cfg.tau, d.modes())?;
    let mut energy = 0.0f64;
    let mut divergence = 0.0f64;
    let mut trajectories = Vec::new();
    for seed in 0..4 {
        let u0 = random_solenoidal(8, 3, 100 + seed)?.scaled(2.0);
        let traj = run_trajectory(&u0, &path, &cfg, &d)?;
        energy = energy.max(energy_defect(&traj));
        for u in &traj.states {
            divergence = divergence.max(u.divergence_residual());
        }
        trajectories.push(traj);
    }
    s.tol("energy_inequality", energy, 1e-10);
    s.tol("stepper_divergence_free", divergence, 1e-11);
    let report = moment_report(&trajectories, 1)?;
    s.at_most("moment_l2_energy_bound", report.l2.mean, report.energy_bound);
    Ok(())
}

/// A discrete field seen as a source through its own quadrature values.
struct Discrete<'a>(&'a FemState, &'a TaylorHood);

impl FieldSource for Discrete<'_> {
    fn sample(&self, _spec: &LatticeSpec) -> ([Vec<f64>; 3], [Vec<f64>; 9]) {
        self.1.evaluate(&self.0.velocity)
    }
}

fn fem_checks(s: &mut Suite) -> Result<()> {
    let mut constants = Vec::new();
    for n in [2, 3] {
        constants.push(infsup_constant(&TaylorHood::new(n)?)?);
    }
    let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = constants.iter().cloned().fold(0.0, f64::max);
    s.at_least("infsup_positive", min, 0.1);
    s.at_least("infsup_ratio", min / max, 0.5);

    let space = TaylorHood::new(2)?;
    let v = random_solenoidal(8, 2, 7)?;
    let p = project_l2_divfree(&v, &space)?;
    let again = project_l2_divfree(&Discrete(&p.state, &space), &space)?;
    let (d, _) = error_between(&again.state, &p.state, &space);
    s.tol("projection_idempotence", rel(d, space.l2_norm(&p.state.velocity)), 1e-10);
    s.tol("projection_divergence", p.state.divergence_residual(&space), 1e-9);

    let zero = zero_diffusion()?;
    let noise = FemNoise::new(&zero, &space);
    let cfg = StepConfig::new(0.1, 0.1, 3);
    let mut u = project_l2_divfree(&random_solenoidal(8, 2, 9)?.scaled(3.0), &space)?.state;
    let e0 = space.block_form(space.mass(), &u.velocity, &u.velocity);
    let mut energy = 0.0f64;
    let incr = vec![0.0; zero.modes()];
    for _ in 0..cfg.steps {
        let next = step_fem(&u, &incr, &noise, &cfg, &space)?.state;
        let lhs = space.block_form(space.mass(), &next.velocity, &next.velocity)
            + 2.0 * cfg.tau * cfg.mu * space.block_form(space.stiffness(), &next.velocity, &next.velocity);
        let rhs = space.block_form(space.mass(), &u.velocity, &u.velocity);
        energy = energy.max(rel((lhs - rhs).max(0.0), e0));
        u = next;
    }
    s.tol("fem_energy_inequality", energy, 1e-10);
    s.tol("fem_divergence_free", u.divergence_residual(&space), 1e-9);
    Ok(())
}

/// The study code path with `γ = 0` (initial data, noise path, spectral and
/// FEM stepping) must not draw a single random number.
fn zero_noise_audit(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let before = thread_draw_count();
    let mut quiet = cfg.clone();
    quiet.noise.gamma = 0.0;
    quiet.u0 = InitialKind::Mixed;
    let d = diffusion_for(&quiet)?;
    let step = StepConfig::new(1.0, 0.25, 2);
    let path = noise_path(&quiet, &d, 0, step.steps, step.tau)?;
    let u0 = initial_field(&quiet, 8)?;
    run_trajectory(&u0, &path, &step, &d)?;
    let space = TaylorHood::new(2)?;
    let uh = project_l2_divfree(&u0, &space)?.state;
    step_fem(&uh, path.increment(0), &FemNoise::new(&d, &space), &step, &space)?;
    s.at_most("zero_noise_rng_draws", (thread_draw_count() - before) as f64, 0.0);
    Ok(())
}

fn noise_checks(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let modes = cfg.noise.modes;
    let steps = 64;
    let tau = 1.0 / 64.0;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut count = 0usize;
    let mut coarsen_defect = 0.0f64;
    let mut assoc = 0usize;
    for p in 0..16 {
        let path = NoisePath::sample(cfg.seed, p, steps, tau, modes)?;
        for &x in path.increments() {
            let z = x / tau.sqrt();
            sum += z;
            sum2 += z * z;
            count += 1;
        }
        let coarse = path.coarsen(4)?;
        for m in 0..coarse.steps() {
            for j in 0..modes {
                let direct: f64 = (0..4).map(|q| path.increment(4 * m + q)[j]).sum();
                coarsen_defect = coarsen_defect.max((coarse.increment(m)[j] - direct).abs());
            }
        }
        if path.coarsen(2)?.coarsen(2)?.increments() != coarse.increments() {
            assoc += 1;
        }
    }
    let n = count as f64;
    let mean = sum / n;
    let var = sum2 / n - mean * mean;
    s.at_most("increment_mean_zscore", mean.abs() * n.sqrt(), 4.0);
    s.at_most("increment_variance_zscore", (var - 1.0).abs() / (2.0 / n).sqrt(), 4.0);
    s.tol("coarsen_sums", coarsen_defect, 1e-14);
    s.at_most("coarsen_associative_mismatches", assoc as f64, 0.0);

    let d = Diffusion::new(DiffusionConfig {
        kind: NoiseKind::Multiplicative,
        gamma: if cfg.noise.gamma > 0.0 { cfg.noise.gamma } else { 0.5 },
        ..cfg.noise
    })?;
    let lip = d.lipschitz_bound();
    let growth = lip * (3.0 * VOLUME).sqrt();
    let mut lip_ratio = 0.0f64;
    let mut growth_ratio = 0.0f64;
    for seed in 0..4 {
        let u = random_solenoidal(8, 2, 200 + seed)?;
        let v = random_solenoidal(8, 2, 300 + seed)?;
        lip_ratio = lip_ratio.max(d.hs_distance(&u, &v)? / u.sub(&v)?.seminorm(0));
        for scale in [0.1, 1.0, 10.0] {
            let w = u.scaled(scale);
            growth_ratio = growth_ratio.max(d.hs_norm(&w, 0)? / (1.0 + w.seminorm(0)));
        }
    }
    s.at_most("diffusion_lipschitz", lip_ratio, lip * (1.0 + 1e-12));
    s.at_most("diffusion_linear_growth", growth_ratio, growth);
    Ok(())
}

fn stepper_noise_checks(s: &mut Suite, cfg: &RunConfig) -> Result<()> {
    let d = Diffusion::new(DiffusionConfig {
        gamma: if cfg.noise.gamma > 0.0 { cfg.noise.gamma } else { 0.5 },
        ..cfg.noise
    })?;
    let u0 = random_solenoidal(8, 2, 11)?.scaled(4.0);
    let radius = 1.05 * u0.sobolev_norm(2)?;
    let plain = StepConfig {
        radius,
        ..StepConfig::new(1.0, 1.0 / 16.0, 16)
    };
    let truncated = StepConfig {
        variant: Variant::Truncated,
        ..plain
    };
    let mut worst = 0.0f64;
    for p in 0..4 {
        let path = NoisePath::sample(cfg.seed, p, plain.steps, plain.tau, d.modes())?;
        let a = run_trajectory(&u0, &path, &plain, &d)?;
        let b = run_trajectory(&u0, &path, &truncated, &d)?;
        for m in 0..=a.stop_index.min(b.stop_index) {
            worst = worst.max(a.states[m].sub(&b.states[m])?.seminorm(0));
        }
        if a.stop_index != b.stop_index {
            worst = f64::INFINITY;
        }
    }
    s.at_most("truncation_coherence", worst, 0.0);
    Ok(())
}
