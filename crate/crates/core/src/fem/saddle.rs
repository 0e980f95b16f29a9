//! Saddle-point solves through the pressure Schur complement.
//!
//! With `K` the scalar velocity matrix (the same for every component) the
//! system `K u_c + B_cᵀ p = f_c`, `Σ_c B_c u_c + e λ = 0`, `eᵀ p = 0` is
//! reduced to the dense bordered system
//! `[[S, −e], [eᵀ, 0]] (p, λ) = (Σ_c B_c K⁻¹ f_c, 0)` with
//! `S = Σ_c B_c K⁻¹ B_cᵀ`, after which `u_c = K⁻¹ (f_c − B_cᵀ p)`.
//! Only `K` is factorised sparsely; the pressure space is small.

use super::sparse::{Csr, Factor};
use super::TaylorHood;
use crate::{Error, Result};
use faer::linalg::solvers::PartialPivLu;
use faer::prelude::Solve;
use faer::Mat;

pub(crate) struct SaddleSolver {
    ns: usize,
    np: usize,
    k: Factor,
    schur: PartialPivLu<f64>,
    div: [Csr; 3],
}

impl SaddleSolver {
    pub fn new(space: &TaylorHood, k: &Csr) -> Result<Self> {
        let ns = space.scalar_dofs();
        let np = space.pressure_dofs();
        let factor = space.scalar_pattern()?.factorize(&k.entries())?;
        let mut s = Mat::<f64>::zeros(np + 1, np + 1);
        for c in 0..3 {
            let b = space.divergence(c);
            let x = factor.solve_many(&b.to_dense())?;
            for (j, xj) in x.iter().enumerate() {
                for (i, v) in b.matvec(xj).into_iter().enumerate() {
                    s[(i, j)] += v;
                }
            }
        }
        for (i, &w) in space.pressure_integrals().iter().enumerate() {
            s[(i, np)] = -w;
            s[(np, i)] = w;
        }
        Ok(Self {
            ns,
            np,
            k: factor,
            schur: s.partial_piv_lu(),
            div: std::array::from_fn(|c| space.divergence(c).clone()),
        })
    }

    /// Solve for a velocity load `f` (component-major); returns the velocity
    /// and the pressure multiplier.
    pub fn solve(&self, load: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ns = self.ns;
        let np = self.np;
        let kf = self.k.solve_many(&(0..3).map(|c| load[c * ns..(c + 1) * ns].to_vec()).collect::<Vec<_>>())?;
        let mut g = Mat::<f64>::zeros(np + 1, 1);
        for c in 0..3 {
            for (i, v) in self.div[c].matvec(&kf[c]).into_iter().enumerate() {
                g[(i, 0)] += v;
            }
        }
        self.schur.solve_in_place(&mut g);
        let p: Vec<f64> = (0..np).map(|i| g[(i, 0)]).collect();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                step: None,
                reason: "singular pressure Schur complement".into(),
            });
        }
        let rhs: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let bt = self.div[c].tmatvec(&p);
                load[c * ns..(c + 1) * ns].iter().zip(&bt).map(|(f, b)| f - b).collect()
            })
            .collect();
        let u = self.k.solve_many(&rhs)?;
        Ok((u.concat(), p))
    }
}
