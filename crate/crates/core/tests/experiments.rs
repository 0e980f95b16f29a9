//! Study drivers, configuration parsing, report output and the binary.

use snslab::experiments::{
    emit_report, exit, run_invariant_suite, run_spatial_study, run_stopping_study, run_temporal_study, Experiment,
    InitialKind, RunConfig, StudyOutput,
};
use std::path::Path;
use std::process::Command;

fn cfg(text: &str) -> RunConfig {
    RunConfig::parse_str(text).unwrap()
}

#[test]
fn config_parses_fractions_lists_and_comments() {
    let c = cfg("experiment = temporal # trailing\n\ntau_ladder = 1/8, 1/16,1/32\nn_ladder = 2,4\nR = inf\nu0 = shear\n");
    assert_eq!(c.experiment, Some(Experiment::Temporal));
    assert_eq!(c.tau_ladder, vec![0.125, 0.0625, 0.03125]);
    assert_eq!(c.n_ladder, vec![2, 4]);
    assert!(c.radius.is_infinite());
    assert_eq!(c.u0, InitialKind::Shear);
}

#[test]
fn config_rejects_bad_input() {
    for text in [
        "bogus = 1",
        "T = 1\nT = 2",
        "T",
        "mu = -1",
        "T = 0",
        "noise.kind = loud",
        "paths = 0",
        "paths = many",
        "n_ladder = 1,2,3",
        "experiment = everything",
        "tol_override = 0",
    ] {
        let err = RunConfig::parse_str(text).unwrap_err();
        assert_eq!(snslab::experiments::exit_code(&err), exit::CONFIG_ERROR, "{text}");
    }
}

#[test]
fn ladder_must_be_nested_and_divide_t() {
    assert!(cfg("tau_ladder = 1/4, 1/6, 1/12").nested_ladder(3).is_err());
    assert!(cfg("T = 1\ntau_ladder = 0.3, 0.15, 0.075").nested_ladder(3).is_err());
    assert!(cfg("tau_ladder = 1/4, 1/8").nested_ladder(3).is_err());
    let (ladder, factors, finest) = cfg("tau_ladder = 1/16, 1/4, 1/8").nested_ladder(3).unwrap();
    assert_eq!(ladder, vec![0.25, 0.125, 0.0625]);
    assert_eq!(factors, vec![4, 2, 1]);
    assert_eq!(finest, 0.0625);
}

#[test]
fn deterministic_temporal_study_converges_at_first_order() {
    // γ = 0, single-mode shear: backward Euler error E ~ τ²
    let c = cfg(
        "experiment = temporal\nnoise.gamma = 0\nu0 = shear\nu0.amp = 1\nR = inf\nN_ref = 8\n\
         tau_ladder = 1/8,1/16,1/32,1/64,1/256\npaths = 8\n",
    );
    let s = run_temporal_study(&c).unwrap();
    let fit = s.fit.expect("fit");
    assert!((1.7..=2.3).contains(&fit.fit.slope), "slope {}", fit.fit.slope);
    // the finest level is the reference itself
    let last = s.levels.last().unwrap();
    assert_eq!(last.median, 0.0);
    // all paths see the same deterministic error
    for l in &s.levels {
        let vals: Vec<f64> = s.rows.iter().filter(|r| r.level == l.level).map(|r| r.total()).collect();
        assert!(vals.iter().all(|v| *v == vals[0]));
    }
}

#[test]
fn temporal_study_needs_enough_paths_and_levels() {
    assert!(run_temporal_study(&cfg("tau_ladder = 1/8,1/16\npaths = 8\nN_ref = 8")).is_err());
}

#[test]
fn spatial_study_reproduces_constant_flow() {
    let c = cfg(
        "experiment = spatial\nnoise.gamma = 0\nu0 = constant\nu0.amp = 0.3\nN_ref = 16\n\
         n_ladder = 2,3,4\ntau = 1/4\npaths = 8\n",
    );
    let s = run_spatial_study(&c).unwrap();
    for r in &s.study.rows {
        assert!(r.total() < 1e-20, "level {} error {}", r.level, r.total());
    }
}

#[test]
fn spatial_study_checks_reference_resolution() {
    let c = cfg("experiment = spatial\nN_ref = 16\nn_ladder = 2,3,6\npaths = 8\n");
    assert!(run_spatial_study(&c).is_err());
    let c = cfg("experiment = spatial\nN_ref = 16\nn_ladder = 2,3\npaths = 8\n");
    assert!(run_spatial_study(&c).is_err());
}

#[test]
fn stopping_probability_is_one_below_the_initial_norm_and_zero_far_above() {
    let base = "experiment = stopping\nnoise.gamma = 0.2\nN_ref = 8\ntau_ladder = 1/8,1/16\nell = 2\npaths = 32\n";
    let low = run_stopping_study(&cfg(&format!("{base}R = 1e-3\n"))).unwrap();
    assert!(low.cells.iter().all(|c| c.p == 1.0));
    let high = run_stopping_study(&cfg(&format!("{base}R = 1e6\n"))).unwrap();
    assert!(high.cells.iter().all(|c| c.p == 0.0 && c.wilson_lo == 0.0));
    assert!(high.non_increasing);
}

#[test]
fn invariant_suite_passes_and_tolerance_override_breaks_it() {
    let r = run_invariant_suite(&cfg("experiment = invariants")).unwrap();
    assert!(r.passed(), "{:?}", r.failures().map(|c| &c.name).collect::<Vec<_>>());
    let r = run_invariant_suite(&cfg("experiment = invariants\ntol_override = 1e-30")).unwrap();
    assert!(!r.passed());
    assert!(r.checks.iter().any(|c| c.name == "zero_noise_rng_draws" && c.passed));
}

#[test]
fn reports_have_headers_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_invariant_suite(&cfg("experiment = invariants")).unwrap();
    let files = emit_report(&StudyOutput::Invariants(r.clone()), dir.path()).unwrap();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,value,threshold,bound,passed"));
    assert_eq!(lines.count(), r.checks.len());
    let first = text.lines().nth(1).unwrap();
    let value = first.split(',').nth(1).unwrap();
    let mantissa = value.split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').len(), 19, "{value}");
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_snslab")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let good = write(dir.path(), "good.cfg", "experiment = invariants\n");
    assert_eq!(cli(&["invariants", "--config", &good, "--out", out]).0, exit::PASS);
    assert!(Path::new(out).join("invariants.csv").exists());
    assert!(Path::new(out).join("config.txt").exists());

    let strict = write(dir.path(), "strict.cfg", "experiment = invariants\ntol_override = 1e-30\n");
    assert_eq!(cli(&["invariants", "--config", &strict, "--out", out]).0, exit::INVARIANT_FAILURE);

    let unknown = write(dir.path(), "unknown.cfg", "experiment = invariants\ncolour = blue\n");
    let (code, err) = cli(&["invariants", "--config", &unknown, "--out", out]);
    assert_eq!(code, exit::CONFIG_ERROR);
    assert!(err.contains("colour"), "{err}");

    assert_eq!(cli(&["temporal", "--config", &good, "--out", out]).0, exit::CONFIG_ERROR);
    assert_eq!(cli(&["invariants", "--config", "/nonexistent.cfg"]).0, exit::CONFIG_ERROR);
    assert_eq!(cli(&["sideways", "--config", &good]).0, exit::CONFIG_ERROR);
    assert_eq!(cli(&["invariants", "--config", &good, "--paths", "0", "--out", out]).0, exit::CONFIG_ERROR);
}
