//! Right-preconditioned restarted GMRES over the real vector space of
//! Hermitian coefficient arrays.
//!
//! The operator is only real-linear (it maps real fields to real fields), so
//! the Arnoldi process uses the real inner product `Re⟨a, b⟩` and real
//! Hessenberg entries. Hermitian symmetry of the iterates is then exact.

use num_complex::Complex64;

const RESTART: usize = 40;

pub struct GmresReport {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(apply: &impl Fn(&[Complex64]) -> Vec<Complex64>, b: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let ax = apply(x);
    b.iter().zip(&ax).map(|(p, q)| p - q).collect()
}

/// Solve `A x = b` to relative residual `tol`, starting from `M⁻¹ b`.
pub fn solve(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    precond: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> GmresReport {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return GmresReport {
            x: vec![Complex64::default(); b.len()],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut x = precond(b);
    let mut r = residual(&apply, b, &x);
    let mut rel = norm(&r) / bnorm;
    let mut iterations = 0;
    while rel > tol && iterations < max_iter {
        let m = RESTART.min(max_iter - iterations);
        let beta = norm(&r);
        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0f64; m], vec![0.0f64; m]);
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m {
            let mut w = apply(&precond(&v[k]));
            // modified Gram–Schmidt, twice for stability
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(vi, &w);
                    h[i][k] += hij;
                    w.iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            iterations += 1;
            if g[k].abs() / bnorm <= 0.1 * tol || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0f64; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![Complex64::default(); b.len()];
        for (yi, vi) in y.iter().zip(&v) {
            z.iter_mut().zip(vi).for_each(|(a, b)| *a += yi * b);
        }
        let dz = precond(&z);
        x.iter_mut().zip(&dz).for_each(|(a, b)| *a += b);
        r = residual(&apply, b, &x);
        rel = norm(&r) / bnorm;
    }
    GmresReport {
        x,
        iterations,
        residual: rel,
        converged: rel <= tol,
    }
}
