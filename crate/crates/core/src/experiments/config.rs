//! Flat `key = value` run configuration.

use crate::noise::{DiffusionConfig, NoiseKind};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Which study to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Temporal,
    Spatial,
    Stopping,
    Invariants,
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temporal" => Ok(Self::Temporal),
            "spatial" => Ok(Self::Spatial),
            "stopping" => Ok(Self::Stopping),
            "invariants" => Ok(Self::Invariants),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Temporal => "temporal",
            Self::Spatial => "spatial",
            Self::Stopping => "stopping",
            Self::Invariants => "invariants",
        })
    }
}

/// Named initial velocity fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// `a[sin x₂ e₁ + sin x₃ e₂ + sin x₁ e₃] + (a/2) cos(x₁+x₂)(1,−1,0)`.
    Mixed,
    /// Taylor–Green cell `a(sin x₁ cos x₂ cos x₃, −cos x₁ sin x₂ cos x₃, 0)`.
    TaylorGreen,
    /// `a sin(x₁) e₂`.
    Shear,
    /// Constant `(a, 2a, 3a)`.
    Constant,
    /// Random solenoidal field with modes `|k_i| ≤ 2`, rescaled to `‖u‖_{L²} = a`.
    Random,
}

impl FromStr for InitialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Self::Mixed),
            "tg" => Ok(Self::TaylorGreen),
            "shear" => Ok(Self::Shear),
            "constant" => Ok(Self::Constant),
            "random" => Ok(Self::Random),
            other => Err(Error::Config(format!("unknown initial field `{other}`"))),
        }
    }
}

/// How the radius grows as the step or mesh is refined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusCoupling {
    Fixed,
    /// `R(τ) = R·(1 + ln(τ₀/τ))^{1/2}` relative to the coarsest level `τ₀`.
    Log,
}

impl FromStr for RadiusCoupling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "log" => Ok(Self::Log),
            other => Err(Error::Config(format!("unknown radius coupling `{other}`"))),
        }
    }
}

/// All run parameters. Every field has a key of the same meaning in the
/// config file; see [`RunConfig::KEYS`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub t_final: f64,
    pub mu: f64,
    pub noise: DiffusionConfig,
    pub n_ref: usize,
    pub tau_ladder: Vec<f64>,
    pub n_ladder: Vec<usize>,
    /// Fixed step of the spatial study.
    pub tau: f64,
    pub radius: f64,
    pub radius_coupling: RadiusCoupling,
    pub ell: usize,
    pub paths: usize,
    pub seed: u64,
    /// Exceedance threshold; `None` calibrates it at the coarsest level.
    pub xi: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub out: PathBuf,
    pub u0: InitialKind,
    pub u0_amp: f64,
    pub u0_seed: u64,
    /// Replaces every tolerance of the invariant suite when set.
    pub tol_override: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            t_final: 1.0,
            mu: 1.0,
            noise: DiffusionConfig::default(),
            n_ref: 16,
            tau_ladder: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0],
            n_ladder: vec![2, 3, 4, 6],
            tau: 1.0 / 16.0,
            radius: 10.0,
            radius_coupling: RadiusCoupling::Fixed,
            ell: 4,
            paths: 64,
            seed: 20240611,
            xi: None,
            alpha: 0.5,
            beta: 1.0,
            out: PathBuf::from("out"),
            u0: InitialKind::Mixed,
            u0_amp: 0.12,
            u0_seed: 1,
            tol_override: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for key `{key}`")))
}

/// Accepts plain numbers and fractions such as `1/64`.
fn parse_real(key: &str, value: &str) -> Result<f64> {
    let v = match value.split_once('/') {
        Some((a, b)) => parse::<f64>(key, a.trim())? / parse::<f64>(key, b.trim())?,
        None => {
            let lower = value.to_ascii_lowercase();
            if lower == "inf" || lower == "infinity" {
                f64::INFINITY
            } else {
                parse(key, value)?
            }
        }
    };
    if v.is_nan() {
        return Err(Error::Config(format!("`{key}` is not a number")));
    }
    Ok(v)
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect()
}

impl RunConfig {
    /// Recognised keys.
    pub const KEYS: [&'static str; 24] = [
        "experiment",
        "T",
        "mu",
        "noise.kind",
        "noise.J",
        "noise.r",
        "noise.gamma",
        "N_ref",
        "tau_ladder",
        "n_ladder",
        "tau",
        "R",
        "R.coupling",
        "ell",
        "paths",
        "seed",
        "xi",
        "alpha",
        "beta",
        "out",
        "u0",
        "u0.amp",
        "u0.seed",
        "tol_override",
    ];

    /// Parse `key = value` lines; `#` starts a comment. Unknown or repeated
    /// keys are errors.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !Self::KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
            }
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: key `{k}` given twice", lineno + 1)));
            }
        }
        let mut cfg = Self::default();
        for (k, v) in &seen {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Set one key; the value is parsed but not cross-validated.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = Some(v.parse()?),
            "T" => self.t_final = parse_real(key, v)?,
            "mu" => self.mu = parse_real(key, v)?,
            "noise.kind" => {
                self.noise.kind = v
                    .parse::<NoiseKind>()
                    .map_err(|_| Error::Config(format!("unknown noise kind `{v}`")))?
            }
            "noise.J" => self.noise.modes = parse(key, v)?,
            "noise.r" => self.noise.r = parse_real(key, v)?,
            "noise.gamma" => self.noise.gamma = parse_real(key, v)?,
            "N_ref" => self.n_ref = parse(key, v)?,
            "tau_ladder" => self.tau_ladder = parse_list(key, v, parse_real)?,
            "n_ladder" => self.n_ladder = parse_list(key, v, |k, s| parse(k, s))?,
            "tau" => self.tau = parse_real(key, v)?,
            "R" => self.radius = parse_real(key, v)?,
            "R.coupling" => self.radius_coupling = v.parse()?,
            "ell" => self.ell = parse(key, v)?,
            "paths" => self.paths = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "xi" => {
                self.xi = if v == "auto" {
                    None
                } else {
                    Some(parse_real(key, v)?)
                }
            }
            "alpha" => self.alpha = parse_real(key, v)?,
            "beta" => self.beta = parse_real(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "u0" => self.u0 = v.parse()?,
            "u0.amp" => self.u0_amp = parse_real(key, v)?,
            "u0.seed" => self.u0_seed = parse(key, v)?,
            "tol_override" => self.tol_override = Some(parse_real(key, v)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Cross-field checks shared by all studies.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad(format!("T must be positive, got {}", self.t_final));
        }
        if !(self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.radius > 0.0) {
            return bad(format!("R must be positive, got {}", self.radius));
        }
        if self.paths < 1 {
            return bad("paths must be at least 1".into());
        }
        if let Some(xi) = self.xi {
            if !(xi > 0.0) {
                return bad(format!("xi must be positive, got {xi}"));
            }
        }
        if self.tau_ladder.iter().any(|t| !(*t > 0.0)) {
            return bad("tau ladder entries must be positive".into());
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.n_ladder.iter().any(|&n| n < 2) {
            return bad("mesh levels need n >= 2".into());
        }
        if !(self.u0_amp.is_finite()) {
            return bad("u0.amp must be finite".into());
        }
        if let Some(t) = self.tol_override {
            if !(t > 0.0) {
                return bad(format!("tol_override must be positive, got {t}"));
            }
        }
        Ok(())
    }

    /// Steps needed to reach `T` with step `tau`, which must divide `T`.
    pub fn steps_for(&self, tau: f64) -> Result<usize> {
        let m = (self.t_final / tau).round();
        if m < 1.0 || ((m * tau) - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::Config(format!(
                "step {tau} does not divide T = {}",
                self.t_final
            )));
        }
        Ok(m as usize)
    }

    /// τ ladder sorted from coarse to fine, with each level an integer
    /// multiple of the finest one. Returns `(ladder, factors, finest)`.
    pub fn nested_ladder(&self, min_levels: usize) -> Result<(Vec<f64>, Vec<usize>, f64)> {
        let mut ladder = self.tau_ladder.clone();
        ladder.sort_by(|a, b| b.partial_cmp(a).expect("finite steps"));
        ladder.dedup();
        if ladder.len() < min_levels {
            return Err(Error::Config(format!(
                "need at least {min_levels} tau levels, got {}",
                ladder.len()
            )));
        }
        let finest = *ladder.last().expect("nonempty ladder");
        let mut factors = Vec::with_capacity(ladder.len());
        for w in ladder.windows(2) {
            let r = w[0] / w[1];
            if (r - r.round()).abs() > 1e-9 * r {
                return Err(Error::Config(format!(
                    "tau ladder is not nested: {} is not a multiple of {}",
                    w[0], w[1]
                )));
            }
        }
        for &t in &ladder {
            factors.push((t / finest).round() as usize);
            self.steps_for(t)?;
        }
        Ok((ladder, factors, finest))
    }

    /// Radius used at step `tau` given the coarsest step `tau0`.
    pub fn radius_at(&self, tau: f64, tau0: f64) -> f64 {
        match self.radius_coupling {
            RadiusCoupling::Fixed => self.radius,
            RadiusCoupling::Log => self.radius * (1.0 + (tau0 / tau).ln()).sqrt(),
        }
    }

    /// Canonical `key = value` rendering (round-trips through
    /// [`RunConfig::parse_str`]).
    pub fn to_text(&self) -> String {
        let join_f = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let join_u = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut lines = Vec::new();
        if let Some(e) = self.experiment {
            lines.push(format!("experiment = {e}"));
        }
        lines.push(format!("T = {:e}", self.t_final));
        lines.push(format!("mu = {:e}", self.mu));
        lines.push(format!("noise.kind = {}", self.noise.kind));
        lines.push(format!("noise.J = {}", self.noise.modes));
        lines.push(format!("noise.r = {:e}", self.noise.r));
        lines.push(format!("noise.gamma = {:e}", self.noise.gamma));
        lines.push(format!("N_ref = {}", self.n_ref));
        lines.push(format!("tau_ladder = {}", join_f(&self.tau_ladder)));
        lines.push(format!("n_ladder = {}", join_u(&self.n_ladder)));
        lines.push(format!("tau = {:e}", self.tau));
        lines.push(format!("R = {:e}", self.radius));
        lines.push(format!(
            "R.coupling = {}",
            match self.radius_coupling {
                RadiusCoupling::Fixed => "fixed",
                RadiusCoupling::Log => "log",
            }
        ));
        lines.push(format!("ell = {}", self.ell));
        lines.push(format!("paths = {}", self.paths));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!(
            "xi = {}",
            self.xi.map_or("auto".to_string(), |x| format!("{x:e}"))
        ));
        lines.push(format!("alpha = {:e}", self.alpha));
        lines.push(format!("beta = {:e}", self.beta));
        lines.push(format!("out = {}", self.out.display()));
        lines.push(format!(
            "u0 = {}",
            match self.u0 {
                InitialKind::Mixed => "mixed",
                InitialKind::TaylorGreen => "tg",
                InitialKind::Shear => "shear",
                InitialKind::Constant => "constant",
                InitialKind::Random => "random",
            }
        ));
        lines.push(format!("u0.amp = {:e}", self.u0_amp));
        lines.push(format!("u0.seed = {}", self.u0_seed));
        if let Some(t) = self.tol_override {
            lines.push(format!("tol_override = {t:e}"));
        }
        lines.join("\n") + "\n"
    }
}
