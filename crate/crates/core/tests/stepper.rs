use snslab::stepper::*;
use snslab::SpectralField;
use snslab::noise::{Diffusion, DiffusionConfig, NoiseKind, NoisePath};
use snslab::spectral::random_solenoidal;

fn shear(n: usize, a: f64) -> SpectralField {
    SpectralField::from_fn(n, |x| [0.0, a * x[0].sin(), 0.0]).unwrap()
}

fn zero_diffusion() -> Diffusion {
    Diffusion::new(DiffusionConfig {
        gamma: 0.0,
        ..DiffusionConfig::default()
    })
    .unwrap()
}

#[test]
fn cutoff_values() {
    let r = 3.0;
    assert_eq!(cutoff_zeta(0.5 * r, r), 1.0);
    assert_eq!(cutoff_zeta(r, r), 1.0);
    assert_eq!(cutoff_zeta(2.0 * r, r), 0.0);
    assert!((cutoff_zeta(1.5 * r, r) - 0.5).abs() < 1e-15);
    let mut last = 1.0;
    for i in 0..=400 {
        let z = cutoff_zeta(i as f64 * 0.01 * r, r);
        assert!(z <= last);
        last = z;
    }
}

#[test]
fn cutoff_is_c2_at_seams() {
    let r = 1.0;
    let h = 1e-4;
    for x in [r, 2.0 * r] {
        let d1 = (cutoff_zeta(x + h, r) - cutoff_zeta(x - h, r)) / (2.0 * h);
        let d2 = (cutoff_zeta(x + h, r) - 2.0 * cutoff_zeta(x, r) + cutoff_zeta(x - h, r)) / (h * h);
        assert!(d1.abs() < 1e-6, "{d1}");
        assert!(d2.abs() < 1e-3, "{d2}");
    }
}

#[test]
fn zero_in_zero_out() {
    let cfg = StepConfig::new(1.0, 0.1, 1);
    let z = SpectralField::zeros(8).unwrap();
    let out = step_semi_implicit(&z, &z, &cfg).unwrap();
    assert_eq!(out.state, z);
    assert_eq!(out.iterations, 0);
}

#[test]
fn shear_mode_decays_by_heat_factor() {
    let (mu, tau, a) = (0.7, 0.05, 0.3);
    let cfg = StepConfig::new(mu, tau, 1);
    let u = shear(8, a);
    let z = SpectralField::zeros(8).unwrap();
    let out = step_semi_implicit(&u, &z, &cfg).unwrap();
    let expect = shear(8, a / (1.0 + mu * tau));
    assert!(out.state.sub(&expect).unwrap().sobolev_norm(0).unwrap() < 1e-12);
}

#[test]
fn single_step_energy_identity() {
    let cfg = StepConfig::new(1.0, 0.1, 1);
    let u = random_solenoidal(12, 3, 5).unwrap().scaled(4.0);
    let z = SpectralField::zeros(12).unwrap();
    let out = step_semi_implicit(&u, &z, &cfg).unwrap();
    let next = out.state;
    let lhs = next.sobolev_norm(0).unwrap().powi(2)
        + next.sub(&u).unwrap().sobolev_norm(0).unwrap().powi(2)
        + 2.0 * cfg.tau * cfg.mu * next.seminorm(1).powi(2);
    let rhs = u.sobolev_norm(0).unwrap().powi(2);
    assert!((lhs - rhs).abs() < 1e-8 * rhs, "{lhs} vs {rhs}");
    assert!(out.iterations > 1);
}

#[test]
fn truncated_matches_plain_below_radius() {
    let mut cfg = StepConfig::new(1.0, 0.05, 1);
    cfg.radius = 1e6;
    let u = random_solenoidal(8, 2, 9).unwrap();
    let noise = Diffusion::new(DiffusionConfig::default())
        .unwrap()
        .apply(&u, &[0.1; 16])
        .unwrap();
    let a = step_semi_implicit(&u, &noise, &cfg).unwrap();
    let b = step_truncated(&u, &noise, &cfg).unwrap();
    assert_eq!(a.state, b.state);
}

#[test]
fn truncated_above_twice_radius_is_heat_step() {
    let mut cfg = StepConfig::new(1.0, 0.05, 1);
    let u = random_solenoidal(8, 2, 3).unwrap().scaled(10.0);
    cfg.radius = u.sobolev_norm(2).unwrap() / 2.5;
    let z = SpectralField::zeros(8).unwrap();
    let out = step_truncated(&u, &z, &cfg).unwrap();
    assert_eq!(out.zeta, 0.0);
    let sys = StepSystem::new(&u, &cfg, 0.0).unwrap();
    let conv = sys.convection(&u).unwrap();
    assert_eq!(conv.sobolev_norm(0).unwrap(), 0.0);
    // heat step on the dealiased band
    let kmax = snslab::spectral::dealias_cutoff(8);
    let ud = u.band_limited(kmax);
    for c in 0..3 {
        for i in 0..512 {
            let k = [i % 8, (i / 8) % 8, i / 64].map(|j| snslab::spectral::wavenumber(j, 8));
            let k2 = k.iter().map(|x| (x * x) as f64).sum::<f64>();
            let expect = ud.coeff_at(c, k) / (1.0 + cfg.tau * cfg.mu * k2);
            assert!((out.state.coeff_at(c, k) - expect).norm() < 1e-14);
        }
    }
}

#[test]
fn convection_scales_with_cutoff() {
    let cfg = StepConfig::new(1.0, 0.05, 1);
    let u = random_solenoidal(8, 2, 21).unwrap();
    let v = random_solenoidal(8, 2, 22).unwrap();
    let full = StepSystem::new(&u, &cfg, 1.0).unwrap().convection(&v).unwrap();
    let part = StepSystem::new(&u, &cfg, 0.37).unwrap().convection(&v).unwrap();
    let diff = part.sub(&full.scaled(0.37)).unwrap().sobolev_norm(0).unwrap();
    assert!(diff < 1e-14 * full.sobolev_norm(0).unwrap().max(1.0));
}

#[test]
fn stop_index_rules() {
    assert_eq!(discrete_stop_index(&[1.0, 2.0, 5.0, 3.0], 4.0), 2);
    assert_eq!(discrete_stop_index(&[5.0, 1.0], 4.0), 0);
    assert_eq!(discrete_stop_index(&[1.0, 2.0, 3.0], 4.0), 2);
    assert_eq!(discrete_stop_index(&[1.0, 2.0, 3.0], f64::INFINITY), 2);
}

#[test]
fn trajectory_reproduces_closed_form_decay() {
    let (mu, tau, a, m) = (1.0, 1.0 / 8.0, 0.2, 8);
    let cfg = StepConfig::new(mu, tau, m);
    let path = NoisePath::zeros(m, tau, 16).unwrap();
    let traj = run_trajectory(&shear(8, a), &path, &cfg, &zero_diffusion()).unwrap();
    for (k, s) in traj.states.iter().enumerate() {
        let expect = shear(8, a * (1.0 + mu * tau).powi(-(k as i32)));
        assert!(s.sub(&expect).unwrap().sobolev_norm(0).unwrap() < 1e-12);
    }
    assert_eq!(traj.stop_index, m);
}

#[test]
fn step_is_measurable_in_previous_state() {
    let cfg = StepConfig::new(1.0, 0.125, 4);
    let dcfg = DiffusionConfig {
        kind: NoiseKind::Multiplicative,
        ..DiffusionConfig::default()
    };
    let diffusion = Diffusion::new(dcfg).unwrap();
    let path = NoisePath::sample(3, 1, 4, 0.125, 16).unwrap();
    let u0 = random_solenoidal(8, 2, 1).unwrap();
    let traj = run_trajectory(&u0, &path, &cfg, &diffusion).unwrap();
    for m in 1..=4 {
        let noise = diffusion.apply(&traj.states[m - 1], path.increment(m - 1)).unwrap();
        let again = step_semi_implicit(&traj.states[m - 1], &noise, &cfg).unwrap();
        assert_eq!(again.state, traj.states[m]);
    }
}

#[test]
fn pressure_of_shear_vanishes() {
    let u = shear(8, 1.0);
    let parts = discrete_pressure(&u, &u, &zero_diffusion()).unwrap();
    assert!(parts.deterministic.coeff_norm() < 1e-14);
}

#[test]
fn noise_pressure_is_gradient() {
    let u = random_solenoidal(8, 2, 4).unwrap();
    let v = random_solenoidal(8, 2, 6).unwrap();
    let diffusion = Diffusion::new(DiffusionConfig {
        kind: NoiseKind::Multiplicative,
        ..DiffusionConfig::default()
    })
    .unwrap();
    let parts = discrete_pressure(&u, &v, &diffusion).unwrap();
    assert!(parts.deterministic.mean().abs() < 1e-15);
    for f in &parts.noise {
        assert!(f.leray_project().sobolev_norm(0).unwrap() < 1e-11);
    }
}

#[test]
fn moment_report_single_path() {
    let cfg = StepConfig::new(1.0, 0.125, 8);
    let path = NoisePath::zeros(8, 0.125, 16).unwrap();
    let u0 = random_solenoidal(8, 2, 2).unwrap();
    let traj = run_trajectory(&u0, &path, &cfg, &zero_diffusion()).unwrap();
    let rep = moment_report(std::slice::from_ref(&traj), 1).unwrap();
    assert_eq!(rep.l2.mean, l2_statistic(&traj, 1));
    assert_eq!(rep.l2.se, 0.0);
    assert!(rep.l2.mean <= rep.energy_bound);
    assert!(moment_report(&[], 1).is_err());
}
