use num_complex::Complex64;
use snslab::stepper::gmres::solve;

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(apply: &impl Fn(&[Complex64]) -> Vec<Complex64>, b: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let ax = apply(x);
    b.iter().zip(&ax).map(|(p, q)| p - q).collect()
}

#[test]
fn solves_small_nonsymmetric_system() {
    // A = D + S with S skew; real-linear action on complex entries
    let n = 12;
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let d = 1.0 + i as f64;
                let left = if i > 0 { x[i - 1] } else { Complex64::default() };
                let right = if i + 1 < n { x[i + 1] } else { Complex64::default() };
                x[i] * d + 0.7 * (right - left)
            })
            .collect()
    };
    let precond = |x: &[Complex64]| -> Vec<Complex64> {
        x.iter().enumerate().map(|(i, z)| z / (1.0 + i as f64)).collect()
    };
    let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64 - 3.0, 0.5 * i as f64)).collect();
    let rep = solve(apply, precond, &b, 1e-12, 100);
    assert!(rep.converged);
    let r = residual(&apply, &b, &rep.x);
    assert!(norm(&r) / norm(&b) <= 1e-12);
}

#[test]
fn zero_rhs_is_free() {
    let rep = solve(|x| x.to_vec(), |x| x.to_vec(), &[Complex64::default(); 4], 1e-10, 10);
    assert_eq!(rep.iterations, 0);
    assert!(rep.x.iter().all(|z| *z == Complex64::default()));
}
