//! Periodic P2/P1 Taylor–Hood discretisation on a structured tetrahedral mesh.
//!
//! The velocity lives in continuous piecewise quadratics, the pressure in
//! continuous piecewise linears with a zero-mean constraint. Discretely
//! divergence-free fields are reached through the saddle-point system
//! `[[K, Bᵀ, 0], [B, 0, e], [0, eᵀ, 0]]` with `e_i = ∫ ψ_i`, solved by a sparse
//! LU of `K` and a dense pressure Schur complement.

pub mod element;
mod infsup;
mod mesh;
mod rates;
mod saddle;
mod solve;
mod space;
pub mod sparse;


pub use infsup::{infsup_constant, infsup_constant_with};
pub use mesh::PeriodicMesh;
pub use rates::{projection_error_rates, RateRecord, PRESSURE_L2_BAND, VELOCITY_H1_BAND, VELOCITY_L2_BAND};
pub use solve::{
    error_between, error_vs_source, error_vs_spectral, project_l2_divfree, project_pressure, run_fem_trajectory,
    step_fem, write_fem_error_csv, FemErrorRow, FemNoise, FemStepOutcome, Projection, FEM_ERROR_HEADER,
};
pub use space::{build_space, TaylorHood};

use crate::spectral::{eval_lattice, modes, LatticeSpec, ScalarSpectralField};
use crate::SpectralField;
use num_complex::Complex64;

/// Relative threshold on `‖B u‖ / ‖u‖` for the divergence-free flag.
pub const DIVERGENCE_TOL: f64 = 1e-9;

/// Taylor–Hood coefficient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FemState {
    /// `3·8n³` velocity coefficients, component-major.
    pub velocity: Vec<f64>,
    /// `n³` pressure coefficients (zero mean when produced by a solve).
    pub pressure: Vec<f64>,
    divergence_free: bool,
}

impl FemState {
    pub fn zeros(space: &TaylorHood) -> Self {
        Self {
            velocity: vec![0.0; space.velocity_dofs()],
            pressure: vec![0.0; space.pressure_dofs()],
            divergence_free: true,
        }
    }

    /// Wrap raw coefficients, setting the flag from the discrete divergence.
    pub fn new(space: &TaylorHood, velocity: Vec<f64>, pressure: Vec<f64>) -> crate::Result<Self> {
        if velocity.len() != space.velocity_dofs() || pressure.len() != space.pressure_dofs() {
            return Err(crate::Error::invalid(format!(
                "state sizes {}/{} do not match the space ({}/{})",
                velocity.len(),
                pressure.len(),
                space.velocity_dofs(),
                space.pressure_dofs()
            )));
        }
        let mut s = Self {
            velocity,
            pressure,
            divergence_free: false,
        };
        s.divergence_free = s.divergence_residual(space) <= DIVERGENCE_TOL;
        Ok(s)
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// `‖B u‖ / ‖u‖` (Euclidean norms of coefficient vectors), 0 for `u = 0`.
    pub fn divergence_residual(&self, space: &TaylorHood) -> f64 {
        let unorm = self.velocity.iter().map(|x| x * x).sum::<f64>().sqrt();
        if unorm == 0.0 {
            return 0.0;
        }
        let b = space.div_apply(&self.velocity);
        b.iter().map(|x| x * x).sum::<f64>().sqrt() / unorm
    }
}

/// Velocity field that can be sampled with its gradient on a point lattice.
pub trait FieldSource {
    /// `values[c][pt]` and `grads[3c + d][pt] = ∂_d v_c`.
    fn sample(&self, lattice: &LatticeSpec) -> ([Vec<f64>; 3], [Vec<f64>; 9]);
}

impl FieldSource for SpectralField {
    fn sample(&self, lattice: &LatticeSpec) -> ([Vec<f64>; 3], [Vec<f64>; 9]) {
        let table = modes(self.n());
        let i = Complex64::i();
        let grads: Vec<Vec<Complex64>> = (0..9)
            .map(|a| {
                let (c, d) = (a / 3, a % 3);
                self.coeffs(c).iter().zip(&table.kd).map(|(z, k)| i * k[d] * z).collect()
            })
            .collect();
        let mut arrays: Vec<&[Complex64]> = (0..3).map(|c| self.coeffs(c)).collect();
        arrays.extend(grads.iter().map(|g| g.as_slice()));
        let mut out = eval_lattice(self.n(), &arrays, lattice).into_iter();
        let vals = std::array::from_fn(|_| out.next().expect("three components"));
        let grads = std::array::from_fn(|_| out.next().expect("nine derivatives"));
        (vals, grads)
    }
}

/// Closed-form field given by value and Jacobian functions.
pub struct AnalyticField<F, G> {
    pub value: F,
    pub jacobian: G,
}

impl<F, G> FieldSource for AnalyticField<F, G>
where
    F: Fn([f64; 3]) -> [f64; 3],
    G: Fn([f64; 3]) -> [[f64; 3]; 3],
{
    fn sample(&self, lattice: &LatticeSpec) -> ([Vec<f64>; 3], [Vec<f64>; 9]) {
        let npts = lattice.len();
        let mut vals: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(npts));
        let mut grads: [Vec<f64>; 9] = std::array::from_fn(|_| Vec::with_capacity(npts));
        for idx in 0..npts {
            let x = lattice.point(idx);
            let v = (self.value)(x);
            let j = (self.jacobian)(x);
            for c in 0..3 {
                vals[c].push(v[c]);
                for d in 0..3 {
                    grads[3 * c + d].push(j[c][d]);
                }
            }
        }
        (vals, grads)
    }
}

/// Scalar field sampled at lattice points (pressure projections).
pub trait ScalarSource {
    fn sample_scalar(&self, lattice: &LatticeSpec) -> Vec<f64>;
}

impl ScalarSource for ScalarSpectralField {
    fn sample_scalar(&self, lattice: &LatticeSpec) -> Vec<f64> {
        eval_lattice(self.n(), &[self.coeffs()], lattice).remove(0)
    }
}

impl<F: Fn([f64; 3]) -> f64> ScalarSource for F {
    fn sample_scalar(&self, lattice: &LatticeSpec) -> Vec<f64> {
        (0..lattice.len()).map(|i| self(lattice.point(i))).collect()
    }
}
