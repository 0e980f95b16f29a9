//! Convergence-in-probability studies, the stopping-time study and the
//! invariant suite behind the `snslab` binary.

mod config;
mod invariants;
mod report;
mod spatial;
mod stopping;
mod temporal;

pub use config::{Experiment, InitialKind, RadiusCoupling, RunConfig};
pub use invariants::{run_invariant_suite, Bound, Check, InvariantReport};
pub use report::{emit_report, StudyOutput};
pub use spatial::{run_spatial_study, SpatialStudy};
pub use stopping::{run_stopping_study, StoppingCell, StoppingStudy};
pub use temporal::{run_temporal_study, temporal_path_rows};

use crate::noise::{Diffusion, NoisePath};
use crate::spectral::random_solenoidal;
use crate::stats::{loglog_fit_weighted, median, proportion_se, LineFit};
use crate::{Error, Result, SpectralField};

/// Process exit codes of the binary.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const INVARIANT_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const SOLVER_FAILURE: i32 = 3;
}

/// Exit code for an error escaping a study.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SolverDiverged { .. } | Error::Factorization { .. } | Error::Eigen(_) => exit::SOLVER_FAILURE,
        _ => exit::CONFIG_ERROR,
    }
}

/// Initial velocity at resolution `n`, restricted to the dealiased band.
pub fn initial_field(cfg: &RunConfig, n: usize) -> Result<SpectralField> {
    let a = cfg.u0_amp;
    let u = match cfg.u0 {
        InitialKind::Mixed => SpectralField::from_fn(n, |x| {
            let c = 0.5 * a * (x[0] + x[1]).cos();
            [a * x[1].sin() + c, a * x[2].sin() - c, a * x[0].sin()]
        })?,
        InitialKind::TaylorGreen => SpectralField::from_fn(n, |x| {
            [
                a * x[0].sin() * x[1].cos() * x[2].cos(),
                -a * x[0].cos() * x[1].sin() * x[2].cos(),
                0.0,
            ]
        })?,
        InitialKind::Shear => SpectralField::from_fn(n, |x| [0.0, a * x[0].sin(), 0.0])?,
        InitialKind::Constant => SpectralField::from_fn(n, |_| [a, 2.0 * a, 3.0 * a])?,
        InitialKind::Random => {
            let r = random_solenoidal(n, 2, cfg.u0_seed)?;
            let norm = r.sobolev_norm(0)?;
            r.scaled(a / norm)
        }
    };
    let u = u.leray_project().dealiased();
    if !u.is_divergence_free() {
        return Err(Error::NotDivergenceFree(u.divergence_residual()));
    }
    Ok(u)
}

pub fn diffusion_for(cfg: &RunConfig) -> Result<Diffusion> {
    Diffusion::new(cfg.noise)
}

/// Noise path of one Monte Carlo sample. A zero diffusion needs no random
/// numbers, so none are drawn.
pub fn noise_path(cfg: &RunConfig, diffusion: &Diffusion, path: u64, steps: usize, tau: f64) -> Result<NoisePath> {
    if diffusion.is_zero() {
        NoisePath::zeros(steps, tau, diffusion.modes())
    } else {
        NoisePath::sample(cfg.seed, path, steps, tau, diffusion.modes())
    }
}

/// One error record: a path at one ladder level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub path: u64,
    /// Position in the ladder, coarse to fine.
    pub level: usize,
    /// `τ` (temporal) or `h` (spatial).
    pub param: f64,
    /// Mesh cells per axis (spatial) or steps (temporal).
    pub size: usize,
    /// `max_{m ≤ m*} ‖e_m‖²_{L²}`.
    pub max_l2: f64,
    /// `Σ_{1 ≤ m ≤ m*} τ ‖∇e_m‖²_{L²}`.
    pub grad_sum: f64,
    /// Stop index `m*` used.
    pub stop_index: usize,
    pub exceeds: bool,
}

impl ErrorRow {
    pub fn total(&self) -> f64 {
        self.max_l2 + self.grad_sum
    }
}

/// Aggregate of one ladder level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSummary {
    pub level: usize,
    pub param: f64,
    pub paths: usize,
    pub median: f64,
    pub exceed_fraction: f64,
    pub exceed_se: f64,
}

/// Log-log regression of level medians against the ladder parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub label: String,
    pub fit: LineFit,
    /// Slope refitted without the coarsest level (robustness gate).
    pub slope_without_coarsest: Option<f64>,
}

impl RateFit {
    /// 95% normal interval for the slope.
    pub fn interval(&self) -> (f64, f64) {
        let h = 1.96 * self.fit.slope_se;
        (self.fit.slope - h, self.fit.slope + h)
    }
}

/// Rows, level summaries and fitted rate of a ladder study.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorStudy {
    pub label: String,
    pub rows: Vec<ErrorRow>,
    pub levels: Vec<LevelSummary>,
    pub fit: Option<RateFit>,
    /// Threshold `ξ` in the exceedance event `E > ξ·param^{2·exponent}`.
    pub xi: f64,
    pub exponent: f64,
}

/// Fill in exceedance flags, per-level summaries and the rate fit.
/// `xi = None` calibrates `ξ` so that the coarsest-level median sits on the
/// threshold.
pub(crate) fn summarise(
    label: &str,
    mut rows: Vec<ErrorRow>,
    params: &[f64],
    exponent: f64,
    xi: Option<f64>,
) -> Result<ErrorStudy> {
    let by_level = |rows: &[ErrorRow], l: usize| -> Vec<f64> {
        rows.iter().filter(|r| r.level == l).map(ErrorRow::total).collect()
    };
    let xi = match xi {
        Some(x) => x,
        None => {
            let med = median(&by_level(&rows, 0));
            let x = med / params[0].powf(2.0 * exponent);
            if x > 0.0 && x.is_finite() {
                x
            } else {
                f64::MIN_POSITIVE
            }
        }
    };
    for r in rows.iter_mut() {
        r.exceeds = r.total() > xi * r.param.powf(2.0 * exponent);
    }
    let mut levels = Vec::with_capacity(params.len());
    for (l, &p) in params.iter().enumerate() {
        let vals = by_level(&rows, l);
        let exceed = rows.iter().filter(|r| r.level == l && r.exceeds).count();
        levels.push(LevelSummary {
            level: l,
            param: p,
            paths: vals.len(),
            median: median(&vals),
            exceed_fraction: if vals.is_empty() { f64::NAN } else { exceed as f64 / vals.len() as f64 },
            exceed_se: proportion_se(exceed, vals.len()),
        });
    }
    let fit = fit_levels(label, &rows, &levels)?;
    Ok(ErrorStudy {
        label: label.to_string(),
        rows,
        levels,
        fit,
        xi,
        exponent,
    })
}

/// Weighted fit of `log median` against `log param` over levels with a
/// positive median. The weight of a level is the inverse asymptotic variance
/// of its log-median, `n / (π/2 · s²)` with `s` the spread of the logs.
fn fit_levels(label: &str, rows: &[ErrorRow], levels: &[LevelSummary]) -> Result<Option<RateFit>> {
    let usable: Vec<&LevelSummary> = levels.iter().filter(|l| l.median > 0.0 && l.median.is_finite()).collect();
    if usable.len() < 2 {
        return Ok(None);
    }
    let weight = |l: &LevelSummary| -> f64 {
        let logs: Vec<f64> = rows
            .iter()
            .filter(|r| r.level == l.level && r.total() > 0.0)
            .map(|r| r.total().ln())
            .collect();
        let n = logs.len() as f64;
        if n < 2.0 {
            return 1.0;
        }
        let m = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let v = std::f64::consts::FRAC_PI_2 * var / n;
        if v > 0.0 {
            1.0 / v
        } else {
            1.0
        }
    };
    let fit_over = |ls: &[&LevelSummary]| -> Result<LineFit> {
        let x: Vec<f64> = ls.iter().map(|l| l.param).collect();
        let y: Vec<f64> = ls.iter().map(|l| l.median).collect();
        let w: Vec<f64> = ls.iter().map(|l| weight(l)).collect();
        loglog_fit_weighted(&x, &y, &w)
    };
    let fit = fit_over(&usable)?;
    let slope_without_coarsest = if usable.len() >= 3 {
        Some(fit_over(&usable[1..])?.slope)
    } else {
        None
    };
    Ok(Some(RateFit {
        label: label.to_string(),
        fit,
        slope_without_coarsest,
    }))
}
