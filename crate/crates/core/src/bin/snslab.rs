use clap::{Parser, ValueEnum};
use snslab::experiments::{
    emit_report, exit, exit_code, run_invariant_suite, run_spatial_study, run_stopping_study, run_temporal_study,
    Experiment, RunConfig, StudyOutput,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Study {
    Temporal,
    Spatial,
    Stopping,
    Invariants,
}

impl From<Study> for Experiment {
    fn from(s: Study) -> Self {
        match s {
            Study::Temporal => Experiment::Temporal,
            Study::Spatial => Experiment::Spatial,
            Study::Stopping => Experiment::Stopping,
            Study::Invariants => Experiment::Invariants,
        }
    }
}

/// Convergence and stopping-time studies for stochastic Navier-Stokes schemes.
#[derive(Debug, Parser)]
#[command(name = "snslab", version)]
struct Cli {
    study: Study,
    /// Flat key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(cli: &Cli) -> snslab::Result<RunConfig> {
    let mut cfg = RunConfig::from_file(&cli.config)?;
    let study = Experiment::from(cli.study);
    if let Some(e) = cfg.experiment {
        if e != study {
            return Err(snslab::Error::Config(format!(
                "config is for the {e} study but {study} was requested"
            )));
        }
    }
    cfg.experiment = Some(study);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = cli.paths {
        cfg.paths = p;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> snslab::Result<i32> {
    let cfg = load(cli)?;
    let (output, code) = match cli.study {
        Study::Temporal => {
            let s = run_temporal_study(&cfg)?;
            if let Some(f) = &s.fit {
                let (lo, hi) = f.interval();
                println!("temporal slope {:.4} (95% CI {lo:.4}..{hi:.4})", f.fit.slope);
            }
            (StudyOutput::Temporal(s), exit::PASS)
        }
        Study::Spatial => {
            let s = run_spatial_study(&cfg)?;
            if let Some(f) = &s.study.fit {
                let (lo, hi) = f.interval();
                println!("spatial slope {:.4} (95% CI {lo:.4}..{hi:.4})", f.fit.slope);
            }
            (StudyOutput::Spatial(s), exit::PASS)
        }
        Study::Stopping => {
            let s = run_stopping_study(&cfg)?;
            for c in &s.cells {
                println!(
                    "tau {:.6} R {:.4} ell {}: P = {:.4} +- {:.4}",
                    c.tau, c.radius, c.ell, c.p, c.se
                );
            }
            println!("non-increasing in tau: {}", s.non_increasing);
            (StudyOutput::Stopping(s), exit::PASS)
        }
        Study::Invariants => {
            let r = run_invariant_suite(&cfg)?;
            for c in &r.checks {
                println!(
                    "{} {} value {:e} threshold {:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            let code = if r.passed() { exit::PASS } else { exit::INVARIANT_FAILURE };
            (StudyOutput::Invariants(r), code)
        }
    };
    let files = emit_report(&output, &cfg.out)?;
    std::fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG_ERROR as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("snslab: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
