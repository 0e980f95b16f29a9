//! Python bindings for the snslab core crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use snslab::experiments::{
    emit_report, run_invariant_suite, run_spatial_study, run_stopping_study, run_temporal_study, ErrorStudy,
    RunConfig as CoreRunConfig, StudyOutput,
};
use snslab::stepper::run_trajectory;
use std::path::PathBuf;

fn py_err(e: snslab::Error) -> PyErr {
    match e {
        snslab::Error::Config(_) | snslab::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Divergence-free Fourier field on the periodic torus.
#[pyclass(name = "SpectralField", module = "snslab_py", from_py_object)]
#[derive(Clone)]
struct PySpectralField(snslab::SpectralField);

#[pymethods]
impl PySpectralField {
    #[staticmethod]
    fn zeros(n: usize) -> PyResult<Self> {
        snslab::SpectralField::zeros(n).map(Self).map_err(py_err)
    }

    /// Field from three flattened `n³` grids of point values.
    #[staticmethod]
    fn from_grid(n: usize, grid: [Vec<f64>; 3]) -> PyResult<Self> {
        snslab::SpectralField::from_grid(n, &grid).map(Self).map_err(py_err)
    }

    /// Random solenoidal field with modes up to `kmax`.
    #[staticmethod]
    fn random_solenoidal(n: usize, kmax: usize, seed: u64) -> PyResult<Self> {
        snslab::spectral::random_solenoidal(n, kmax, seed).map(Self).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn to_grid(&self) -> [Vec<f64>; 3] {
        self.0.to_grid()
    }

    fn leray_project(&self) -> Self {
        Self(self.0.leray_project())
    }

    fn divergence_residual(&self) -> f64 {
        self.0.divergence_residual()
    }

    /// Full `W^{s,2}` norm.
    fn sobolev_norm(&self, s: u32) -> PyResult<f64> {
        self.0.sobolev_norm(s).map_err(py_err)
    }

    /// `‖∇^s u‖_{L²}`.
    fn seminorm(&self, s: u32) -> f64 {
        self.0.seminorm(s)
    }

    fn inner(&self, other: &Self) -> PyResult<f64> {
        self.0.inner(&other.0).map_err(py_err)
    }

    fn scaled(&self, alpha: f64) -> Self {
        Self(self.0.scaled(alpha))
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("SpectralField(n={}, l2={:.6e})", self.0.n(), self.0.seminorm(0))
    }
}

/// Brownian increments of one path, keyed by `(seed, path)`.
#[pyclass(name = "NoisePath", module = "snslab_py", from_py_object)]
#[derive(Clone)]
struct PyNoisePath(snslab::NoisePath);

#[pymethods]
impl PyNoisePath {
    #[staticmethod]
    fn sample(seed: u64, path: u64, steps: usize, tau: f64, modes: usize) -> PyResult<Self> {
        snslab::NoisePath::sample(seed, path, steps, tau, modes)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes()
    }

    /// Increments, step-major (`steps × modes`).
    fn increments(&self) -> Vec<f64> {
        self.0.increments().to_vec()
    }

    fn coarsen(&self, factor: usize) -> PyResult<Self> {
        self.0.coarsen(factor).map(Self).map_err(py_err)
    }
}

/// Diffusion coefficient applied to the noise increments.
#[pyclass(name = "Diffusion", module = "snslab_py", from_py_object)]
#[derive(Clone)]
struct PyDiffusion(snslab::Diffusion);

#[pymethods]
impl PyDiffusion {
    #[new]
    #[pyo3(signature = (kind = "additive", gamma = 0.5, modes = 16, r = 2.0))]
    fn new(kind: &str, gamma: f64, modes: usize, r: f64) -> PyResult<Self> {
        let kind = kind.parse().map_err(py_err)?;
        snslab::Diffusion::new(snslab::DiffusionConfig { kind, r, gamma, modes })
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes()
    }

    fn lipschitz_bound(&self) -> f64 {
        self.0.lipschitz_bound()
    }

    /// `Σ_j Φ(u) e_j ΔW_j`.
    fn apply(&self, u: &PySpectralField, increments: Vec<f64>) -> PyResult<PySpectralField> {
        self.0.apply(&u.0, &increments).map(PySpectralField).map_err(py_err)
    }
}

/// Run one semi-implicit trajectory and return its per-step diagnostics.
#[pyfunction]
#[pyo3(signature = (u0, path, diffusion, mu = 1.0, radius = None, truncated = false))]
fn trajectory<'py>(
    py: Python<'py>,
    u0: &PySpectralField,
    path: &PyNoisePath,
    diffusion: &PyDiffusion,
    mu: f64,
    radius: Option<f64>,
    truncated: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = snslab::StepConfig::new(mu, path.0.tau(), path.0.steps());
    if let Some(r) = radius {
        cfg.radius = r;
    }
    if truncated {
        cfg.variant = snslab::Variant::Truncated;
    }
    let (u0, p, d) = (u0.0.clone(), path.0.clone(), diffusion.0.clone());
    let traj = py.detach(move || run_trajectory(&u0, &p, &cfg, &d)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("norms", traj.norms.iter().map(|n| n.to_vec()).collect::<Vec<_>>())?;
    out.set_item("iterations", traj.iterations.clone())?;
    out.set_item("zeta", traj.zeta.clone())?;
    out.set_item("stop_index", traj.stop_index)?;
    out.set_item(
        "states",
        traj.states.into_iter().map(PySpectralField).collect::<Vec<_>>(),
    )?;
    Ok(out)
}

/// Periodic P2/P1 Taylor-Hood space on an `n³` cube mesh.
#[pyclass(name = "TaylorHood", module = "snslab_py")]
struct PyTaylorHood(snslab::TaylorHood);

#[pymethods]
impl PyTaylorHood {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        snslab::TaylorHood::new(n).map(Self).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn velocity_dofs(&self) -> usize {
        self.0.velocity_dofs()
    }

    #[getter]
    fn pressure_dofs(&self) -> usize {
        self.0.pressure_dofs()
    }

    /// Discrete inf-sup constant of the pair.
    fn infsup_constant(&self) -> PyResult<f64> {
        snslab::fem::infsup_constant(&self.0).map_err(py_err)
    }

    /// Errors `(‖e‖_{L²}, ‖∇e‖_{L²})` of the discrete divergence-free
    /// projection of `field`.
    fn projection_error(&self, field: &PySpectralField) -> PyResult<(f64, f64)> {
        let p = snslab::fem::project_l2_divfree(&field.0, &self.0).map_err(py_err)?;
        snslab::fem::error_vs_spectral(&p.state, &field.0, &self.0).map_err(py_err)
    }
}

/// Flat `key = value` run configuration.
#[pyclass(name = "RunConfig", module = "snslab_py", from_py_object)]
#[derive(Clone)]
struct PyRunConfig(CoreRunConfig);

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        CoreRunConfig::parse_str(text).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        CoreRunConfig::from_file(&path).map(Self).map_err(py_err)
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.0.set(key, value).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

fn study_dict<'py>(py: Python<'py>, s: &ErrorStudy) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("params", s.levels.iter().map(|l| l.param).collect::<Vec<_>>())?;
    out.set_item("medians", s.levels.iter().map(|l| l.median).collect::<Vec<_>>())?;
    out.set_item(
        "exceed_fractions",
        s.levels.iter().map(|l| l.exceed_fraction).collect::<Vec<_>>(),
    )?;
    out.set_item("xi", s.xi)?;
    if let Some(f) = &s.fit {
        out.set_item("slope", f.fit.slope)?;
        out.set_item("slope_ci", f.interval())?;
        out.set_item("slope_without_coarsest", f.slope_without_coarsest)?;
    }
    Ok(out)
}

/// Run one study (`temporal`, `spatial`, `stopping` or `invariants`) and
/// return a summary dict. When `out` is given the CSV report is written there.
#[pyfunction]
#[pyo3(signature = (study, config, out = None))]
fn run_study<'py>(
    py: Python<'py>,
    study: &str,
    config: &PyRunConfig,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.0.clone();
    cfg.validate().map_err(py_err)?;
    let study = study.to_owned();
    let output = py
        .detach(move || -> snslab::Result<StudyOutput> {
            Ok(match study.as_str() {
                "temporal" => StudyOutput::Temporal(run_temporal_study(&cfg)?),
                "spatial" => StudyOutput::Spatial(run_spatial_study(&cfg)?),
                "stopping" => StudyOutput::Stopping(run_stopping_study(&cfg)?),
                "invariants" => StudyOutput::Invariants(run_invariant_suite(&cfg)?),
                other => return Err(snslab::Error::Config(format!("unknown study `{other}`"))),
            })
        })
        .map_err(py_err)?;
    if let Some(dir) = out {
        emit_report(&output, &dir).map_err(py_err)?;
    }
    let d = match &output {
        StudyOutput::Temporal(s) => study_dict(py, s)?,
        StudyOutput::Spatial(s) => study_dict(py, &s.study)?,
        StudyOutput::Stopping(s) => {
            let d = PyDict::new(py);
            d.set_item("taus", s.cells.iter().map(|c| c.tau).collect::<Vec<_>>())?;
            d.set_item("p", s.cells.iter().map(|c| c.p).collect::<Vec<_>>())?;
            d.set_item("se", s.cells.iter().map(|c| c.se).collect::<Vec<_>>())?;
            d.set_item("non_increasing", s.non_increasing)?;
            d
        }
        StudyOutput::Invariants(r) => {
            let d = PyDict::new(py);
            d.set_item("passed", r.passed())?;
            d.set_item(
                "checks",
                r.checks
                    .iter()
                    .map(|c| (c.name.clone(), c.value, c.threshold, c.passed))
                    .collect::<Vec<_>>(),
            )?;
            d
        }
    };
    Ok(d)
}

#[pymodule]
fn snslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralField>()?;
    m.add_class::<PyNoisePath>()?;
    m.add_class::<PyDiffusion>()?;
    m.add_class::<PyTaylorHood>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add("VOLUME", snslab::VOLUME)?;
    Ok(())
}
