use super::TaylorHood;
use crate::{Error, Result};
use faer::{Mat, Side};

/// Discrete inf-sup constant
/// `min_{π_h} sup_{v_h} ∫ div v_h π_h / (‖v_h‖_{H¹} ‖π_h‖_{L²})`
/// over zero-mean pressures.
pub fn infsup_constant(space: &TaylorHood) -> Result<f64> {
    infsup_constant_with(space, true)
}

/// As [`infsup_constant`]; with `zero_mean = false` the constant pressure is
/// admitted and the result collapses to zero.
///
/// The square of the constant is the smallest eigenvalue of
/// `S p = λ Q p` with `S = B (A + M)⁻¹ Bᵀ` summed over components and `Q` the
/// pressure mass matrix. The zero-mean restriction drops the eigenvalue of
/// the constant mode, which `S` annihilates exactly.
pub fn infsup_constant_with(space: &TaylorHood, zero_mean: bool) -> Result<f64> {
    let ns = space.scalar_dofs();
    let np = space.pressure_dofs();
    let h1 = space.mass().combine(1.0, space.stiffness(), 1.0)?;
    let mut entries = Vec::with_capacity(h1.nnz());
    h1.push_block(&mut entries, 0, 0, 1.0, false);
    let factor = super::sparse::factorize(ns, &entries)?;

    let mut s = vec![vec![0.0; np]; np];
    for c in 0..3 {
        let b = space.divergence(c);
        let rows: Vec<Vec<f64>> = b.to_dense();
        let x = factor.solve_many(&rows)?;
        for (j, xj) in x.iter().enumerate() {
            let col = b.matvec(xj);
            for i in 0..np {
                s[i][j] += col[i];
            }
        }
    }
    let q = space.pressure_mass().to_dense();
    let qm = Mat::<f64>::from_fn(np, np, |i, j| q[i][j]);
    let llt = qm.llt(Side::Lower).map_err(|e| Error::Eigen(format!("pressure mass is not definite: {e:?}")))?;
    let l = llt.L();
    // C = L⁻¹ S L⁻ᵀ via two forward substitutions (S is symmetric)
    let forward = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut y = vec![vec![0.0; np]; np];
        for col in 0..np {
            for i in 0..np {
                let mut acc = m[i][col];
                for k in 0..i {
                    acc -= l[(i, k)] * y[k][col];
                }
                y[i][col] = acc / l[(i, i)];
            }
        }
        y
    };
    let y = forward(&s);
    let yt: Vec<Vec<f64>> = (0..np).map(|i| (0..np).map(|j| y[j][i]).collect()).collect();
    let c = forward(&yt);
    let cm = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (c[i][j] + c[j][i]));
    let eig = cm
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let lambda = if zero_mean { eig[1] } else { eig[0] };
    Ok(lambda.max(0.0).sqrt())
}
