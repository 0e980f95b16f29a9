use snslab::spectral::*;
use num_complex::Complex64;
use snslab::{Error, VOLUME};
use snslab::noise::{Diffusion, DiffusionConfig, NoiseKind};
use std::f64::consts::PI;

fn shear(n: usize) -> SpectralField {
    SpectralField::from_fn(n, |x| [0.0, x[0].sin(), 0.0]).unwrap()
}

#[test]
fn constant_field_has_only_mean_mode() {
    let f = SpectralField::from_fn(8, |_| [1.0, 0.0, 0.0]).unwrap();
    assert!((f.coeff_at(0, [0, 0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    let rest: f64 = f.coeffs(0).iter().skip(1).map(|z| z.norm()).sum();
    assert!(rest < 1e-14);
}

#[test]
fn shear_coefficients() {
    let f = shear(8);
    assert!((f.coeff_at(1, [1, 0, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    assert!((f.coeff_at(1, [-1, 0, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    let total: f64 = (0..3).flat_map(|c| f.coeffs(c).iter()).map(|z| z.norm_sqr()).sum();
    assert!((total - 0.5).abs() < 1e-15);
    assert!(f.is_divergence_free());
}

#[test]
fn odd_or_small_resolution_rejected() {
    assert!(SpectralField::zeros(7).is_err());
    assert!(SpectralField::zeros(2).is_err());
}

#[test]
fn grid_round_trip() {
    let n = 8;
    let mut s = 1u64;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let grid: [Vec<f64>; 3] = std::array::from_fn(|_| (0..n * n * n).map(|_| next()).collect());
    let f = SpectralField::from_grid(n, &grid).unwrap();
    let back = f.to_grid();
    for c in 0..3 {
        for (a, b) in grid[c].iter().zip(&back[c]) {
            assert!((a - b).abs() < 1e-14);
        }
    }
    // Parseval
    let grid_l2: f64 = grid.iter().flatten().map(|v| v * v).sum::<f64>() * VOLUME / (n * n * n) as f64;
    assert!((f.sobolev_norm(0).unwrap().powi(2) - grid_l2).abs() < 1e-12 * grid_l2);
}

#[test]
fn leray_laws() {
    let grad = SpectralField::from_fn(8, |x| [x[0].sin(), 0.0, 0.0]).unwrap();
    assert!(grad.leray_project().sobolev_norm(0).unwrap() < 1e-15);
    let s = shear(8);
    assert!(s.leray_project().sub(&s).unwrap().sobolev_norm(0).unwrap() < 1e-15);
    let v = SpectralField::from_fn(8, |x| [x[1].cos() + (x[0] + x[2]).sin(), x[1].sin(), x[0].cos()]).unwrap();
    let p = v.leray_project();
    assert!(p.leray_project().sub(&p).unwrap().sobolev_norm(0).unwrap() < 1e-14);
    assert!(p.divergence_residual() < 1e-14);
}

#[test]
fn inverse_laplacian_examples() {
    let s = ScalarSpectralField::from_fn(8, |x| x[0].sin()).unwrap();
    let p = s.inv_laplacian().unwrap();
    assert!(p.sub(&s.scaled(-1.0)).unwrap().coeff_norm() < 1e-15);
    let c = ScalarSpectralField::from_fn(8, |x| (2.0 * x[1]).cos()).unwrap();
    let p = c.inv_laplacian().unwrap();
    assert!(p.sub(&c.scaled(-0.25)).unwrap().coeff_norm() < 1e-15);
    let one = ScalarSpectralField::from_fn(8, |_| 1.0).unwrap();
    assert!(one.inv_laplacian().is_err());
}

#[test]
fn norm_examples() {
    let z = SpectralField::zeros(8).unwrap();
    for k in 0..=3 {
        assert_eq!(z.sobolev_norm(k).unwrap(), 0.0);
    }
    let s = shear(8);
    let v = VOLUME;
    assert!((s.sobolev_norm(0).unwrap() - (v / 2.0).sqrt()).abs() < 1e-13);
    assert!((s.sobolev_norm(1).unwrap() - v.sqrt()).abs() < 1e-13);
    assert!(s.sobolev_norm(4).is_err());
}

#[test]
fn convection_examples() {
    let n = 8;
    let u = SpectralField::from_fn(n, |_| [1.0, 0.0, 0.0]).unwrap();
    let out = convect(&u, &shear(n)).unwrap();
    let expect = SpectralField::from_fn(n, |x| [0.0, x[0].cos(), 0.0]).unwrap();
    assert!(out.sub(&expect).unwrap().sobolev_norm(0).unwrap() < 1e-13);
    let w = random_solenoidal(n, 2, 1).unwrap();
    let c = SpectralField::from_fn(n, |_| [0.3, -1.0, 2.0]).unwrap();
    assert!(convect(&w, &c).unwrap().sobolev_norm(0).unwrap() < 1e-14);
    assert!(convect(&w, &SpectralField::zeros(12).unwrap()).is_err());
}

#[test]
fn convection_is_skew_on_solenoidal_fields() {
    for seed in 0..5 {
        let u = random_solenoidal(16, 5, seed).unwrap();
        let v = random_solenoidal(16, 5, seed + 100).unwrap();
        let val = convect(&u, &v).unwrap().inner(&v).unwrap();
        assert!(val.abs() < 1e-11, "{val}");
    }
}

#[test]
fn shear_pressure_vanishes() {
    let d = Diffusion::new(DiffusionConfig::default()).unwrap();
    let parts = pressure_decompose(&shear(8), &d).unwrap();
    assert!(parts.deterministic.coeff_norm() < 1e-15);
    let brute = convect(&shear(8), &shear(8)).unwrap().divergence();
    assert!(brute.coeff_norm() < 1e-15);
}

#[test]
fn pressure_needs_solenoidal_input() {
    let d = Diffusion::new(DiffusionConfig::default()).unwrap();
    let grad = SpectralField::from_fn(8, |x| [x[0].sin(), 0.0, 0.0]).unwrap();
    assert!(matches!(pressure_decompose(&grad, &d), Err(Error::NotDivergenceFree(_))));
}

#[test]
fn zero_state_pressure_is_gradient_part_of_noise() {
    let d = Diffusion::new(DiffusionConfig {
        kind: NoiseKind::Additive,
        ..DiffusionConfig::default()
    })
    .unwrap();
    let z = SpectralField::zeros(8).unwrap();
    let parts = pressure_decompose(&z, &d).unwrap();
    assert_eq!(parts.deterministic.coeff_norm(), 0.0);
    for (j, f) in parts.noise.iter().enumerate() {
        let raw = d.mode_field(&z, j).unwrap();
        let grad = raw.sub(&raw.leray_project()).unwrap().scaled(-1.0);
        assert!(f.sub(&grad).unwrap().sobolev_norm(0).unwrap() < 1e-14);
        assert!(f.leray_project().sobolev_norm(0).unwrap() < 1e-14);
    }
}

#[test]
fn point_evaluation() {
    let s = shear(8);
    let v = s.evaluate_at_points(&[[PI / 2.0, 0.0, 0.0]]);
    assert!((v[0][1] - 1.0).abs() < 1e-14 && v[0][0].abs() < 1e-14);
    let f = random_solenoidal(8, 3, 7).unwrap();
    let grid = f.to_grid();
    for idx in [0, 17, 300, 511] {
        let x = grid_point(8, idx);
        let p = f.evaluate_at_points(&[x])[0];
        for c in 0..3 {
            assert!((p[c] - grid[c][idx]).abs() < 1e-12);
        }
    }
}

#[test]
fn lattice_matches_direct_evaluation() {
    let f = random_solenoidal(8, 3, 11).unwrap();
    let lattice = LatticeSpec {
        cells: 3,
        spacing: snslab::PERIOD / 3.0,
        offsets: vec![[0.1, 0.2, 0.3], [1.0, 0.5, 0.25]],
    };
    let arrays = [f.coeffs(0), f.coeffs(1), f.coeffs(2)];
    let vals = eval_lattice(8, &arrays, &lattice);
    for idx in 0..lattice.len() {
        let p = f.evaluate_at_points(&[lattice.point(idx)])[0];
        for c in 0..3 {
            assert!((vals[c][idx] - p[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn snapshot_round_trip() {
    let f = random_solenoidal(8, 3, 2).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&f, &mut buf).unwrap();
    let snap = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(snap.field, f);
    assert!(snap.divergence_free_flag);
    assert!(read_snapshot(&buf[..10]).is_err());
}

#[test]
fn resample_preserves_band() {
    let f = random_solenoidal(8, 3, 4).unwrap();
    let up = f.resample(16).unwrap();
    assert!((up.sobolev_norm(2).unwrap() - f.sobolev_norm(2).unwrap()).abs() < 1e-13);
    assert_eq!(up.resample(8).unwrap(), f);
}
