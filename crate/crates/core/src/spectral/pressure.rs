//! Stochastic pressure decomposition.

use super::{band_limit_in_place, dealias_cutoff, fft, modes, Convector, ScalarSpectralField, SpectralField};
use crate::noise::Diffusion;
use crate::{Error, Result};
use num_complex::Complex64;

/// Deterministic pressure `π_det` and the per-mode noise pressure fields
/// `Φ^π e_j`.
#[derive(Clone, Debug)]
pub struct PressureParts {
    pub deterministic: ScalarSpectralField,
    pub noise: Vec<SpectralField>,
}

pub(crate) fn require_solenoidal(u: &SpectralField) -> Result<()> {
    let r = u.divergence_residual();
    if r > 1e-10 {
        return Err(Error::NotDivergenceFree(r));
    }
    Ok(())
}

/// `-∇Δ⁻¹ div F`, the gradient part of `F` with a minus sign.
pub(crate) fn noise_pressure(f: &SpectralField) -> SpectralField {
    let n = f.n();
    let table = modes(n);
    let mut coeffs: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); n * n * n]);
    for (idx, kd) in table.kd.iter().enumerate() {
        let k2 = table.k2[idx];
        if k2 == 0.0 {
            continue;
        }
        let dot = f.coeffs(0)[idx] * kd[0] + f.coeffs(1)[idx] * kd[1] + f.coeffs(2)[idx] * kd[2];
        for c in 0..3 {
            coeffs[c][idx] = -(dot * kd[c]) / k2;
        }
    }
    let mut out = SpectralField::from_coeffs(n, coeffs).expect("resolution already validated");
    out.set_divergence_free(false);
    out
}

/// `π_det = -Δ⁻¹ div((u·∇)u)` and `Φ^π = -∇Δ⁻¹ div Φ(u)`.
pub fn pressure_decompose(u: &SpectralField, diffusion: &Diffusion) -> Result<PressureParts> {
    require_solenoidal(u)?;
    let conv = Convector::new(u).apply(u)?;
    let deterministic = conv.divergence().inv_laplacian()?.scaled(-1.0);
    let noise = (0..diffusion.modes())
        .map(|j| diffusion.mode_field(u, j).map(|f| noise_pressure(&f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureParts {
        deterministic,
        noise,
    })
}

/// `Σ_ij ∂_i ∂_j (a_i b_j)` with dealiased inputs and output.
pub fn div_div_product(a: &SpectralField, b: &SpectralField) -> Result<ScalarSpectralField> {
    a.same_n(b)?;
    let n = a.n();
    let kmax = dealias_cutoff(n);
    let ag = a.band_limited(kmax).to_grid();
    let bg = b.band_limited(kmax).to_grid();
    let plan = fft::plan(n);
    let table = modes(n);
    let len = n * n * n;
    let mut acc = vec![Complex64::default(); len];
    for i in 0..3 {
        for j in 0..3 {
            let prod: Vec<f64> = ag[i].iter().zip(&bg[j]).map(|(x, y)| x * y).collect();
            let spectrum = plan.forward_real(&prod);
            for (idx, z) in spectrum.iter().enumerate() {
                acc[idx] -= table.kd[idx][i] * table.kd[idx][j] * z;
            }
        }
    }
    band_limit_in_place(n, kmax, std::slice::from_mut(&mut acc));
    Ok(ScalarSpectralField::from_raw(n, acc))
}

impl ScalarSpectralField {
    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_raw(self.n(), self.coeffs().iter().map(|z| z * alpha).collect())
    }
}
