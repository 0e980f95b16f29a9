//! Property-based checks of the module invariants.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use snslab::experiments::RunConfig;
use snslab::fem::{project_l2_divfree, TaylorHood};
use snslab::noise::{Diffusion, DiffusionConfig, NoisePath};
use snslab::spectral::{dealias_cutoff, random_solenoidal, Convector};
use snslab::stats::wilson_interval;
use snslab::stepper::{cutoff_zeta, discrete_stop_index, step_semi_implicit, StepConfig};
use snslab::{ScalarSpectralField, SpectralField};

fn random_field(n: usize, seed: u64) -> SpectralField {
    let mut rng = StdRng::seed_from_u64(seed);
    let grid = std::array::from_fn(|_| (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    SpectralField::from_grid(n, &grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leray_is_an_idempotent_divergence_free_projection(seed in any::<u64>()) {
        let v = random_field(8, seed);
        let p = v.leray_project();
        prop_assert!(p.divergence_residual() <= 1e-12);
        let pp = p.leray_project();
        prop_assert!(pp.sub(&p).unwrap().seminorm(0) <= 1e-13 * p.seminorm(0).max(1.0));
        // P is an orthogonal projection: ‖Pv‖ ≤ ‖v‖
        prop_assert!(p.seminorm(0) <= v.seminorm(0) * (1.0 + 1e-14));
    }

    #[test]
    fn inverse_laplacian_inverts_on_zero_mean(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut g: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = g.iter().sum::<f64>() / 512.0;
        g.iter_mut().for_each(|x| *x -= mean);
        let f = ScalarSpectralField::from_grid(8, &g).unwrap();
        let back = f.inv_laplacian().unwrap().laplacian();
        prop_assert!(back.sub(&f).unwrap().coeff_norm() <= 1e-13 * f.coeff_norm());
    }

    #[test]
    fn grid_round_trip_is_exact(seed in any::<u64>()) {
        let v = random_field(8, seed);
        let back = SpectralField::from_grid(8, &v.to_grid()).unwrap();
        prop_assert!(back.sub(&v).unwrap().seminorm(0) <= 1e-13 * v.seminorm(0));
    }

    #[test]
    fn convection_is_skew_on_the_band(seed in 0u64..1000, amp in 0.1f64..10.0) {
        let w = random_solenoidal(12, 3, seed).unwrap().scaled(amp);
        let v = random_field(12, seed ^ 0x5a5a).band_limited(dealias_cutoff(12));
        let cv = Convector::new(&w).apply(&v).unwrap();
        let s = cv.inner(&v).unwrap();
        prop_assert!(s.abs() <= 1e-12 * cv.seminorm(0) * v.seminorm(0) + 1e-14);
    }

    #[test]
    fn deterministic_step_dissipates_energy(
        seed in 0u64..1000,
        amp in 0.1f64..20.0,
        tau in 0.005f64..0.5,
        mu in 0.05f64..2.0,
    ) {
        let u = random_solenoidal(8, 2, seed).unwrap().scaled(amp);
        let cfg = StepConfig::new(mu, tau, 1);
        let next = step_semi_implicit(&u, &SpectralField::zeros(8).unwrap(), &cfg).unwrap().state;
        let inc = next.sub(&u).unwrap().seminorm(0);
        let lhs = next.seminorm(0).powi(2) + inc * inc + 2.0 * mu * tau * next.seminorm(1).powi(2);
        prop_assert!(lhs <= u.seminorm(0).powi(2) * (1.0 + 1e-10));
        prop_assert!(next.divergence_residual() <= 1e-12);
    }

    #[test]
    fn coarsening_composes(seed in any::<u64>(), path in 0u64..64, j in 1usize..6) {
        let fine = NoisePath::sample(seed, path, 48, 1.0 / 48.0, j).unwrap();
        for (a, b) in [(2, 2), (2, 3), (2, 6), (3, 4)] {
            let two = fine.coarsen(a).unwrap().coarsen(b).unwrap();
            let one = fine.coarsen(a * b).unwrap();
            prop_assert_eq!(two.steps(), one.steps());
            prop_assert!((two.tau() - one.tau()).abs() <= 1e-15);
            for (x, y) in two.increments().iter().zip(one.increments()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }
        // W(T) is preserved by any coarsening
        let total = |p: &NoisePath, m: usize| -> f64 { (0..p.steps()).map(|s| p.increment(s)[m]).sum() };
        let c = fine.coarsen(8).unwrap();
        for m in 0..j {
            prop_assert!((total(&fine, m) - total(&c, m)).abs() <= 1e-13);
        }
    }

    #[test]
    fn noise_paths_are_pure_functions_of_their_key(seed in any::<u64>(), path in any::<u64>()) {
        let a = NoisePath::sample(seed, path, 8, 0.125, 4).unwrap();
        let b = NoisePath::sample(seed, path, 8, 0.125, 4).unwrap();
        prop_assert_eq!(a.increments(), b.increments());
        let c = NoisePath::sample(seed, path.wrapping_add(1), 8, 0.125, 4).unwrap();
        prop_assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn stop_index_is_the_first_crossing(norms in prop::collection::vec(0.0f64..20.0, 1..40), r in 0.1f64..25.0) {
        let j = discrete_stop_index(&norms, r);
        prop_assert!(j < norms.len());
        prop_assert!(norms[..j].iter().all(|&x| x < r));
        prop_assert!(norms[j] >= r || j == norms.len() - 1);
    }

    #[test]
    fn cutoff_is_monotone_between_zero_and_one(x in 0.0f64..50.0, dx in 0.0f64..5.0, r in 0.5f64..20.0) {
        let a = cutoff_zeta(x, r);
        let b = cutoff_zeta(x + dx, r);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
        if x <= r { prop_assert_eq!(a, 1.0); }
        if x >= 2.0 * r { prop_assert_eq!(a, 0.0); }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1usize..500, frac in 0.0f64..=1.0) {
        let k = ((trials as f64) * frac).round() as usize;
        let (lo, hi) = wilson_interval(k, trials, 1.96);
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
    }

    #[test]
    fn config_text_round_trips(seed in any::<u64>(), paths in 8usize..512, ell in 1usize..16, mu in 0.01f64..10.0) {
        let mut cfg = RunConfig::default();
        cfg.seed = seed;
        cfg.paths = paths;
        cfg.ell = ell;
        cfg.mu = mu;
        let back = RunConfig::parse_str(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.paths, paths);
        prop_assert_eq!(back.ell, ell);
        prop_assert!((back.mu - mu).abs() <= 1e-15 * mu);
        prop_assert_eq!(back.to_text(), cfg.to_text());
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z]{3,10}") {
        prop_assume!(!RunConfig::KEYS.contains(&key.as_str()));
        let text = format!("{} = 1\n", key);
        prop_assert!(RunConfig::parse_str(&text).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fem_projection_is_discretely_divergence_free(seed in 0u64..1000, amp in 0.1f64..10.0) {
        let space = TaylorHood::new(2).unwrap();
        let v = random_solenoidal(8, 2, seed).unwrap().scaled(amp);
        let p = project_l2_divfree(&v, &space).unwrap();
        prop_assert!(p.state.is_divergence_free());
        prop_assert!(space.l2_norm(&p.state.velocity) <= v.seminorm(0) * (1.0 + 1e-10));
    }

    #[test]
    fn zero_diffusion_needs_no_draws(steps in 1usize..32, j in 1usize..20) {
        let d = Diffusion::new(DiffusionConfig { gamma: 0.0, modes: j, ..DiffusionConfig::default() }).unwrap();
        let before = snslab::noise::rng::thread_draw_count();
        let mut cfg = RunConfig::default();
        cfg.noise = *d.config();
        let path = snslab::experiments::noise_path(&cfg, &d, 3, steps, 0.1).unwrap();
        prop_assert_eq!(snslab::noise::rng::thread_draw_count(), before);
        prop_assert!(path.increments().iter().all(|&x| x == 0.0));
    }
}
