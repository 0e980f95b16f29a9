use super::{ErrorStudy, InvariantReport, SpatialStudy, StoppingStudy};
use crate::fem::write_fem_error_csv;
use crate::Result;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// A finished study ready to be written out.
#[derive(Clone, Debug)]
pub enum StudyOutput {
    Temporal(ErrorStudy),
    Spatial(SpatialStudy),
    Stopping(StoppingStudy),
    Invariants(InvariantReport),
}

fn real(x: f64) -> String {
    format!("{x:.17e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn writer(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<csv::Writer<BufWriter<File>>> {
    let path = dir.join(name);
    let w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    files.push(path);
    Ok(w)
}

fn write_error_study(study: &ErrorStudy, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let mut w = writer(dir, "errors.csv", files)?;
    w.write_record([
        "path", "level", "param", "size", "maxL2", "gradSum", "total", "stop_index", "exceeds",
    ])?;
    for r in &study.rows {
        w.write_record([
            r.path.to_string(),
            r.level.to_string(),
            real(r.param),
            r.size.to_string(),
            real(r.max_l2),
            real(r.grad_sum),
            real(r.total()),
            r.stop_index.to_string(),
            u8::from(r.exceeds).to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = writer(dir, "levels.csv", files)?;
    w.write_record(["level", "param", "paths", "median", "exceed_fraction", "exceed_se"])?;
    for l in &study.levels {
        w.write_record([
            l.level.to_string(),
            real(l.param),
            l.paths.to_string(),
            real(l.median),
            real(l.exceed_fraction),
            real(l.exceed_se),
        ])?;
    }
    w.flush()?;

    let mut w = writer(dir, "rates.csv", files)?;
    w.write_record([
        "label",
        "slope",
        "slope_se",
        "ci_lo",
        "ci_hi",
        "intercept",
        "slope_without_coarsest",
        "xi",
        "exponent",
    ])?;
    if let Some(fit) = &study.fit {
        let (lo, hi) = fit.interval();
        w.write_record([
            fit.label.clone(),
            real(fit.fit.slope),
            real(fit.fit.slope_se),
            real(lo),
            real(hi),
            real(fit.fit.intercept),
            opt_real(fit.slope_without_coarsest),
            real(study.xi),
            real(study.exponent),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write the CSV tables of a study into `dir` (created if missing) and return
/// the files written. Output depends only on the study, so reruns with the
/// same configuration and seed are byte-identical.
pub fn emit_report(output: &StudyOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match output {
        StudyOutput::Temporal(study) => write_error_study(study, dir, &mut files)?,
        StudyOutput::Spatial(study) => {
            write_error_study(&study.study, dir, &mut files)?;
            let path = dir.join("fem_errors.csv");
            write_fem_error_csv(BufWriter::new(File::create(&path)?), &study.steps)?;
            files.push(path);
        }
        StudyOutput::Stopping(study) => {
            let mut w = writer(dir, "stopping.csv", &mut files)?;
            w.write_record([
                "tau", "R", "ell", "paths", "stopped", "p", "se", "wilson_lo", "wilson_hi",
            ])?;
            for c in &study.cells {
                w.write_record([
                    real(c.tau),
                    real(c.radius),
                    c.ell.to_string(),
                    c.paths.to_string(),
                    c.stopped.to_string(),
                    real(c.p),
                    real(c.se),
                    real(c.wilson_lo),
                    real(c.wilson_hi),
                ])?;
            }
            w.flush()?;
            let mut w = writer(dir, "trend.csv", &mut files)?;
            w.write_record(["non_increasing"])?;
            w.write_record([u8::from(study.non_increasing).to_string()])?;
            w.flush()?;
        }
        StudyOutput::Invariants(report) => {
            let mut w = writer(dir, "invariants.csv", &mut files)?;
            w.write_record(["name", "value", "threshold", "bound", "passed"])?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    real(c.value),
                    real(c.threshold),
                    format!("{:?}", c.bound).to_lowercase(),
                    u8::from(c.passed).to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(files)
}
