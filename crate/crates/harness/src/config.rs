//! Scenario configuration in TOML.
//!
//! ```toml
//! name = "negative-energy"
//! symmetry_class = "Sigma_N"
//! seed = 7
//!
//! [params]
//! dim = 3
//! s = 0.7
//! sigma = 0.6
//!
//! [grid]
//! n = 48            # or one entry per axis
//! length = 48.0
//!
//! [initial]
//! kind = "gaussian"
//! amplitude = 1.0
//! width_y = 2.5
//! width_n = 2.5
//!
//! [cutoff]
//! radius = 10.0
//!
//! [time]
//! dt0 = 5e-4
//! t_end = 0.2
//! sample_interval = 0.01
//! ```
//!
//! Sections `[quadrature]`, `[detection]`, `[numerics]`, `[diagnostics]`,
//! `[ground_state]` and `[perturbation]` are optional.

use std::path::{Path, PathBuf};

use fracnls::evolution::Controller;
use fracnls::ground_state::PetviashviliOptions;
use fracnls::{Grid64, ModelParams, Params64};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    /// Cylindrically symmetric with a finite `x_N` moment.
    #[serde(rename = "Sigma_N")]
    SigmaN,
    /// Cylindrically symmetric.
    #[serde(rename = "Sigma")]
    Sigma,
}

impl SymmetryClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymmetryClass::SigmaN => "Sigma_N",
            SymmetryClass::Sigma => "Sigma",
        }
    }
}

/// A single value for every axis or one value per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Clone> PerAxis<T> {
    pub fn resolve(&self, dim: usize) -> Option<Vec<T>> {
        match self {
            PerAxis::Uniform(v) => Some(vec![v.clone(); dim]),
            PerAxis::Each(v) if v.len() == dim => Some(v.clone()),
            PerAxis::Each(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub dim: usize,
    pub s: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: PerAxis<usize>,
    pub length: PerAxis<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `amplitude exp(-|y|^2/(2 width_y^2) - x_N^2/(2 width_n^2))`.
    Gaussian { amplitude: f64, width_y: f64, width_n: f64 },
    /// `amplitude exp(-(|y| - r0)^2 - x_N^2/(2 width_n^2))`.
    Ring { amplitude: f64, r0: f64, width_n: f64 },
    /// `factor Q` for the ground state of the configured equation.
    GroundStateMultiple { factor: f64 },
    /// A snapshot written by this tool; relative paths resolve against the
    /// configuration file's directory.
    FromFile { path: PathBuf },
}

impl InitialCondition {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialCondition::Gaussian { .. } => "gaussian",
            InitialCondition::Ring { .. } => "ring",
            InitialCondition::GroundStateMultiple { .. } => "ground-state-multiple",
            InitialCondition::FromFile { .. } => "from-file",
        }
    }
}

/// Seeded random cylindrical packets added to the initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSection {
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt0: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    /// Offset of the centred difference for `dM/dt`; `0` disables it.
    #[serde(default = "default_fd_delta")]
    pub fd_delta: f64,
    #[serde(default = "yes")]
    pub adaptive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub nodes: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { nodes: fracnls::quadrature::DEFAULT_NODES }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub ratio: f64,
    pub persistence: usize,
    pub min_dt: f64,
    pub boundary_threshold: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let c = Controller::default();
        Self {
            ratio: c.detection_ratio,
            persistence: c.persistence,
            min_dt: c.min_dt,
            boundary_threshold: c.boundary_threshold,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    /// Apply the 2/3-rule mask after every nonlinear substep.
    pub dealias: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Evaluate the virial right-hand side at every sample.
    pub rhs: bool,
    /// Young parameter of the mass-critical refined bound.
    pub eta: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { rhs: true, eta: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateSection {
    pub change_tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for GroundStateSection {
    fn default() -> Self {
        let o = PetviashviliOptions::default();
        Self { change_tol: o.change_tol, residual_tol: o.residual_tol, max_iter: o.max_iter }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub symmetry_class: SymmetryClass,
    #[serde(default)]
    pub seed: u64,
    pub params: ParamsSection,
    pub grid: GridSection,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    pub cutoff: CutoffSection,
    pub time: TimeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub ground_state: GroundStateSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_fd_delta() -> f64 {
    1e-3
}

fn yes() -> bool {
    true
}

/// Smallest half box, in units of the `x_N` width, for the `x_N` moment of a
/// Gaussian profile to be resolved (`e^{-a^2/2} < 1e-8`).
const MOMENT_HALF_WIDTHS: f64 = 6.07;

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Serialize(e.to_string()))
    }

    pub fn model_params(&self) -> Result<Params64> {
        let p = &self.params;
        ModelParams::new(p.dim, p.s, p.sigma).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn shape(&self) -> Result<Vec<usize>> {
        self.grid
            .n
            .resolve(self.params.dim)
            .ok_or_else(|| HarnessError::Config(format!("grid.n needs one entry or {} entries", self.params.dim)))
    }

    pub fn lengths(&self) -> Result<Vec<f64>> {
        self.grid
            .length
            .resolve(self.params.dim)
            .ok_or_else(|| HarnessError::Config(format!("grid.length needs one entry or {} entries", self.params.dim)))
    }

    pub fn build_grid(&self) -> Result<std::sync::Arc<Grid64>> {
        let shape = self.shape()?;
        if let Some(n) = shape.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return Err(HarnessError::Config(format!("grid sizes must be even and at least 4, got {n}")));
        }
        Grid64::new(&shape, &self.lengths()?).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn resolve_path(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn petviashvili_options(&self) -> PetviashviliOptions {
        let g = &self.ground_state;
        PetviashviliOptions {
            change_tol: g.change_tol,
            residual_tol: g.residual_tol,
            max_iter: g.max_iter,
            ..PetviashviliOptions::default()
        }
    }

    pub fn controller(&self) -> Controller {
        let (t, d) = (&self.time, &self.detection);
        Controller {
            dt0: t.dt0,
            t_end: t.t_end,
            sample_interval: t.sample_interval,
            fd_delta: (t.fd_delta > 0.0).then_some(t.fd_delta),
            adaptive: t.adaptive,
            detection_ratio: d.ratio,
            persistence: d.persistence,
            min_dt: d.min_dt,
            boundary_threshold: d.boundary_threshold,
        }
    }

    /// Checks that only need the equation and the box (enough for a
    /// ground-state solve in any dimension).
    pub fn validate_model(&self) -> Result<()> {
        self.model_params()?;
        self.build_grid()?;
        let g = &self.ground_state;
        if !(g.change_tol > 0.0 && g.residual_tol > 0.0 && g.max_iter > 0) {
            return Err(HarnessError::Config("ground_state tolerances and max_iter must be positive".into()));
        }
        Ok(())
    }

    /// Full validation for a time-dependent scenario.
    pub fn validate(&self) -> Result<()> {
        self.validate_model()?;
        let dim = self.params.dim;
        if dim < 2 {
            return Err(HarnessError::Config("cylindrical scenarios need N >= 2".into()));
        }
        let lengths = self.lengths()?;
        let min_ly = lengths[..dim - 1].iter().cloned().fold(f64::INFINITY, f64::min);
        let r = self.cutoff.radius;
        if !(r > 0.0 && r < min_ly / 4.0) {
            return Err(HarnessError::Config(format!(
                "cutoff.radius = {r} must lie in (0, min(L_y)/4 = {})",
                min_ly / 4.0
            )));
        }
        let t = &self.time;
        if !(t.dt0 > 0.0 && t.t_end >= 0.0 && t.sample_interval >= 0.0 && t.fd_delta >= 0.0) {
            return Err(HarnessError::Config(
                "time: dt0 > 0 and t_end, sample_interval, fd_delta >= 0 required".into(),
            ));
        }
        if t.sample_interval > 0.0 && t.fd_delta >= 0.5 * t.sample_interval {
            return Err(HarnessError::Config("time.fd_delta must be below half the sample interval".into()));
        }
        if self.quadrature.nodes < 8 {
            return Err(HarnessError::Config("quadrature.nodes must be at least 8".into()));
        }
        let d = &self.detection;
        if !(d.ratio > 1.0 && d.persistence > 0 && d.min_dt > 0.0 && d.boundary_threshold > 0.0) {
            return Err(HarnessError::Config(
                "detection: ratio > 1, persistence > 0, min_dt > 0, boundary_threshold > 0 required".into(),
            ));
        }
        if self.diagnostics.eta.is_nan() || self.diagnostics.eta <= 0.0 {
            return Err(HarnessError::Config("diagnostics.eta must be positive".into()));
        }
        if let Some(p) = &self.perturbation {
            if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
                return Err(HarnessError::Config("perturbation.amplitude must be finite and nonnegative".into()));
            }
        }
        self.validate_initial(&lengths)
    }

    fn validate_initial(&self, lengths: &[f64]) -> Result<()> {
        let l_n = lengths[lengths.len() - 1];
        let finite_moment = |width_n: f64| {
            if self.symmetry_class == SymmetryClass::SigmaN && l_n / 2.0 < MOMENT_HALF_WIDTHS * width_n {
                Err(HarnessError::Config(format!(
                    "Sigma_N data needs a resolved x_N moment: width_n = {width_n} requires L_N >= {}",
                    2.0 * MOMENT_HALF_WIDTHS * width_n
                )))
            } else {
                Ok(())
            }
        };
        match &self.initial {
            InitialCondition::Gaussian { amplitude, width_y, width_n } => {
                if !(amplitude.is_finite() && *width_y > 0.0 && *width_n > 0.0) {
                    return Err(HarnessError::Config("gaussian needs finite amplitude and positive widths".into()));
                }
                finite_moment(*width_n)
            }
            InitialCondition::Ring { amplitude, r0, width_n } => {
                if !(amplitude.is_finite() && *r0 >= 0.0 && *width_n > 0.0) {
                    return Err(HarnessError::Config("ring needs finite amplitude, r0 >= 0, width_n > 0".into()));
                }
                finite_moment(*width_n)
            }
            InitialCondition::GroundStateMultiple { factor } => {
                if !factor.is_finite() {
                    return Err(HarnessError::Config("ground-state factor must be finite".into()));
                }
                Ok(())
            }
            InitialCondition::FromFile { path } => {
                let p = self.resolve_path(path);
                if !p.is_file() {
                    return Err(HarnessError::Config(format!("initial snapshot {} does not exist", p.display())));
                }
                Ok(())
            }
        }
    }
}
