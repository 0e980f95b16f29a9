//! Numerical laboratory for the 3D stochastic Navier–Stokes equations on the
//! periodic torus `[0, 2π)³`.
//!
//! The crate is organised bottom-up:
//!
//! * [`noise`]: truncated cylindrical Wiener process and the diffusion
//!   coefficient `Φ`.
//! * [`spectral`]: divergence-free Fourier fields, Leray projector, inverse
//!   Laplacian, Sobolev norms and the stochastic pressure decomposition.
//! * [`stepper`]: semi-implicit Euler–Maruyama time stepping (plain and
//!   truncated), discrete stopping indices and moment diagnostics.
//! * [`fem`]: periodic P2/P1 Taylor–Hood space-time scheme.
//! * [`experiments`]: convergence-in-probability studies and the invariant
//!   suite behind the `snslab` binary.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod noise;
pub mod spectral;
pub mod stats;
pub mod stepper;

pub use error::{Error, Result};
pub use fem::{FemState, PeriodicMesh, TaylorHood};
pub use noise::{Diffusion, DiffusionConfig, NoiseBasisMode, NoiseKind, NoisePath};
pub use spectral::{ScalarSpectralField, SpectralField};
pub use stepper::{StepConfig, Trajectory, Variant};

/// Side length of the periodic box.
pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// Volume of the torus, `(2π)³`.
pub const VOLUME: f64 = PERIOD * PERIOD * PERIOD;
