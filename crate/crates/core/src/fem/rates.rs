use super::{project_l2_divfree, project_pressure, FieldSource, ScalarSource, TaylorHood};
use crate::stats::{loglog_fit, LineFit};
use crate::{Error, Result};

/// Accepted slope band of the velocity `L²` projection error.
pub const VELOCITY_L2_BAND: (f64, f64) = (1.7, 2.3);
/// Accepted slope band of the velocity gradient projection error.
pub const VELOCITY_H1_BAND: (f64, f64) = (0.8, 1.3);
/// Accepted slope band of the pressure `L²` projection error.
pub const PRESSURE_L2_BAND: (f64, f64) = (1.7, 2.3);

/// Projection errors per mesh level and their log-log slopes against `h`.
#[derive(Clone, Debug)]
pub struct RateRecord {
    pub levels: Vec<usize>,
    pub h: Vec<f64>,
    pub velocity_l2: Vec<f64>,
    pub velocity_h1: Vec<f64>,
    pub pressure_l2: Vec<f64>,
    /// `‖∇Π_h v‖ / ‖∇v‖` per level (H¹ stability of the projection).
    pub stability: Vec<f64>,
    pub slope_l2: LineFit,
    pub slope_h1: LineFit,
    pub slope_pressure: LineFit,
}

impl RateRecord {
    /// Every fitted slope lies inside its band.
    pub fn within_bands(&self) -> bool {
        let inside = |s: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&s);
        inside(self.slope_l2.slope, VELOCITY_L2_BAND)
            && inside(self.slope_h1.slope, VELOCITY_H1_BAND)
            && inside(self.slope_pressure.slope, PRESSURE_L2_BAND)
    }
}

/// Divergence-free velocity projection and pressure `L²` projection errors
/// over a mesh ladder.
pub fn projection_error_rates(
    levels: &[usize],
    velocity: &impl FieldSource,
    pressure: &impl ScalarSource,
) -> Result<RateRecord> {
    if levels.len() < 3 {
        return Err(Error::invalid(format!(
            "rate fits need at least 3 mesh levels, got {}",
            levels.len()
        )));
    }
    let mut h = Vec::new();
    let mut vl2 = Vec::new();
    let mut vh1 = Vec::new();
    let mut pl2 = Vec::new();
    let mut stab = Vec::new();
    for &n in levels {
        let space = TaylorHood::new(n)?;
        let proj = project_l2_divfree(velocity, &space)?;
        let (_, grads) = velocity.sample(space.quadrature_points());
        let grad_norm: f64 = (0..space.num_quadrature_points())
            .map(|i| space.quadrature_weight(i) * grads.iter().map(|g| g[i] * g[i]).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        let (_, perr) = project_pressure(pressure, &space)?;
        h.push(space.h());
        vl2.push(proj.error_l2);
        vh1.push(proj.error_h1);
        pl2.push(perr);
        stab.push(if grad_norm > 0.0 {
            space.grad_norm(&proj.state.velocity) / grad_norm
        } else {
            0.0
        });
    }
    Ok(RateRecord {
        slope_l2: loglog_fit(&h, &vl2)?,
        slope_h1: loglog_fit(&h, &vh1)?,
        slope_pressure: loglog_fit(&h, &pl2)?,
        levels: levels.to_vec(),
        h,
        velocity_l2: vl2,
        velocity_h1: vh1,
        pressure_l2: pl2,
        stability: stab,
    })
}
