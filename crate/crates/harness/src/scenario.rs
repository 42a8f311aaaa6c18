//! Scenario execution: initial data, hypothesis check, evolution with
//! virial diagnostics at every sample, and the output bundle.
//!
//! A run directory holds
//!
//! * `series.csv`: the fixed per-sample columns of [`SERIES_COLUMNS`];
//! * `diagnostics.csv`: both virial variants, bounds and remainders;
//! * `growth.csv`: `G(t)/G(0)` after every step;
//! * `summary.json`: parameters, verdict, status, detection record, growth fit;
//! * `u0.snap`, `final.snap` and, when solved for, `ground_state.snap`.
//!
//! `summary.json` is written last, so its presence marks a finished run.

use std::path::Path;
use std::sync::Arc;

use fracnls::cutoff::{CutoffProfile, CylWeight};
use fracnls::evolution::{
    evolve, fit_growth, Controller, Propagator, Sample, SimulationState, StopReason, BOUNDARY_SHELL,
};
use fracnls::ground_state::{gaussian_seed, petviashvili, GroundStateResult};
use fracnls::quadrature::{ResolventQuadrature, GATE_RATIOS};
use fracnls::spectral::{boundary_mass_fraction, energy, mass, sobolev_seminorm};
use fracnls::virial::{
    balakrishnan_check, centred_difference, refine, report_from, rhs_integrals, virial_value, RhsOptions, Variant,
};
use fracnls::{corpus, Field64, Grid64, Params64};
use serde::{Deserialize, Serialize};

use crate::config::{InitialCondition, ScenarioConfig, SymmetryClass};
use crate::criteria::{check_criteria, needs_ground_state, CriterionVerdict};
use crate::error::{HarnessError, Result};
use crate::io::{fmt_f64, render_csv, write_atomic, write_json, Snapshot};

pub const SERIES_COLUMNS: [&str; 12] = [
    "t",
    "mass",
    "energy",
    "grad_s_norm",
    "M_phiR",
    "M_psiR",
    "dMdt_fd",
    "rhs_m1_total",
    "rhs_kinetic",
    "rhs_bilap",
    "rhs_nonlinear",
    "boundary_mass",
];

pub const DIAGNOSTIC_COLUMNS: [&str; 20] = [
    "t",
    "dMdt_fd_phi",
    "rhs_phi",
    "relres_phi",
    "scale_phi",
    "leading_phi",
    "cross_phi",
    "dMdt_fd_psi",
    "rhs_psi",
    "relres_psi",
    "scale_psi",
    "leading_psi",
    "cross_psi",
    "kinetic_bound",
    "remainder",
    "refined_leading",
    "refined_k1",
    "refined_remainder",
    "refined_bound",
    "quadrature_scale",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Completed,
    BlowupDetected,
    DomainBreach,
    NumericalFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::BlowupDetected => "blowup-detected",
            Status::DomainBreach => "domain-breach",
            Status::NumericalFailure => "numerical-failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Completed => 0,
            Status::BlowupDetected => 2,
            Status::DomainBreach => 3,
            Status::NumericalFailure => 4,
        }
    }

    pub fn from_reason(reason: StopReason) -> Self {
        match reason {
            StopReason::Completed => Status::Completed,
            StopReason::GradientGrowth | StopReason::StepCollapse => Status::BlowupDetected,
            StopReason::DomainTooSmall => Status::DomainBreach,
            StopReason::NonFinite => Status::NumericalFailure,
        }
    }
}

/// One row of `series.csv`. The derivative and right-hand-side columns use
/// `phi_R` for `Sigma_N` runs and `psi_R` for `Sigma` runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_s_norm: f64,
    pub m_phi: f64,
    pub m_psi: f64,
    pub dmdt_fd: f64,
    pub rhs_total: f64,
    pub rhs_kinetic: f64,
    pub rhs_bilap: f64,
    pub rhs_nonlinear: f64,
    pub boundary_mass: f64,
}

impl SeriesRow {
    fn cells(&self) -> Vec<String> {
        [
            self.t,
            self.mass,
            self.energy,
            self.grad_s_norm,
            self.m_phi,
            self.m_psi,
            self.dmdt_fd,
            self.rhs_total,
            self.rhs_kinetic,
            self.rhs_bilap,
            self.rhs_nonlinear,
            self.boundary_mass,
        ]
        .iter()
        .map(|&v| fmt_f64(v))
        .collect()
    }
}

/// One row of `diagnostics.csv`; `NaN` marks quantities not evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub dmdt_fd_phi: f64,
    pub rhs_phi: f64,
    pub relres_phi: f64,
    pub scale_phi: f64,
    /// `4 sigma N E0 - 2 (sigma N - 2s) G^2`.
    pub leading_phi: f64,
    pub cross_phi: f64,
    pub dmdt_fd_psi: f64,
    pub rhs_psi: f64,
    pub relres_psi: f64,
    pub scale_psi: f64,
    /// `4 sigma (N-1) E0 - 2 (sigma (N-1) - 2s) G^2`.
    pub leading_psi: f64,
    pub cross_psi: f64,
    /// `4 s G^2`.
    pub kinetic_bound: f64,
    /// Bi-Laplacian term plus exterior nonlinear tail.
    pub remainder: f64,
    /// Mass-critical runs only: `8 s E0`.
    pub refined_leading: f64,
    pub refined_k1: f64,
    pub refined_remainder: f64,
    pub refined_bound: f64,
    pub quadrature_scale: f64,
}

impl DiagnosticRow {
    fn empty(t: f64) -> Self {
        let n = f64::NAN;
        DiagnosticRow {
            t,
            dmdt_fd_phi: n,
            rhs_phi: n,
            relres_phi: n,
            scale_phi: n,
            leading_phi: n,
            cross_phi: n,
            dmdt_fd_psi: n,
            rhs_psi: n,
            relres_psi: n,
            scale_psi: n,
            leading_psi: n,
            cross_psi: n,
            kinetic_bound: n,
            remainder: n,
            refined_leading: n,
            refined_k1: n,
            refined_remainder: n,
            refined_bound: n,
            quadrature_scale: n,
        }
    }

    fn cells(&self) -> Vec<String> {
        [
            self.t,
            self.dmdt_fd_phi,
            self.rhs_phi,
            self.relres_phi,
            self.scale_phi,
            self.leading_phi,
            self.cross_phi,
            self.dmdt_fd_psi,
            self.rhs_psi,
            self.relres_psi,
            self.scale_psi,
            self.leading_psi,
            self.cross_psi,
            self.kinetic_bound,
            self.remainder,
            self.refined_leading,
            self.refined_k1,
            self.refined_remainder,
            self.refined_bound,
            self.quadrature_scale,
        ]
        .iter()
        .map(|&v| fmt_f64(v))
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub dim: usize,
    pub s: f64,
    pub sigma: f64,
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub radius: f64,
    pub symmetry_class: SymmetryClass,
    pub initial: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub mass: f64,
    pub energy: f64,
    pub grad_s_norm: f64,
    pub boundary_mass: f64,
    pub m_phi: f64,
    pub m_psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub detected: bool,
    pub reason: String,
    pub t_detect: Option<f64>,
    pub max_ratio: f64,
    pub t_final: f64,
    pub steps: usize,
    pub final_dt: f64,
    pub final_boundary_mass: f64,
    pub max_mass_drift: f64,
    pub ratio_threshold: f64,
    pub persistence: usize,
    pub min_dt: f64,
    pub boundary_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFitRecord {
    pub exponent: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Start of the fitted window.
    pub t_start: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateRecord {
    pub residual: f64,
    pub iterations: usize,
    pub mass: f64,
    pub energy: f64,
    pub grad_s_norm: f64,
}

impl GroundStateRecord {
    pub fn from_result(q: &GroundStateResult<f64>) -> Self {
        Self {
            residual: q.residual,
            iterations: q.iterations,
            mass: q.mass,
            energy: q.energy,
            grad_s_norm: q.grad_s_norm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub samples: usize,
    pub max_relres_phi: Option<f64>,
    pub max_relres_psi: Option<f64>,
    /// Samples whose right-hand side could not be evaluated.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub status: Status,
    pub exit_code: i32,
    pub params: ParamsRecord,
    pub s_c: f64,
    pub criteria: CriterionVerdict,
    pub initial: Functionals,
    pub detection: DetectionRecord,
    pub growth_fit: Option<GrowthFitRecord>,
    pub ground_state: Option<GroundStateRecord>,
    pub diagnostics: DiagnosticsRecord,
    pub error: Option<String>,
}

/// Initial data with everything computed before time stepping.
pub struct Prepared {
    pub grid: Arc<Grid64>,
    pub params: Params64,
    pub u0: Field64,
    pub ground_state: Option<GroundStateResult<f64>>,
    pub verdict: CriterionVerdict,
}

pub fn solve_ground_state(
    cfg: &ScenarioConfig,
    params: &Params64,
    grid: &Arc<Grid64>,
) -> Result<GroundStateResult<f64>> {
    Ok(petviashvili(params, &gaussian_seed(grid), &cfg.petviashvili_options())?)
}

/// Builds the initial data, solves for `Q` when the data or the hypothesis
/// check needs it, and evaluates the hypotheses.
pub fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    cfg.validate()?;
    let params = cfg.model_params()?;
    let grid = cfg.build_grid()?;
    let mut ground_state = None;
    let base = match &cfg.initial {
        InitialCondition::Gaussian { amplitude, width_y, width_n } => {
            corpus::gaussian(&grid, *amplitude, *width_y, *width_n)
        }
        InitialCondition::Ring { amplitude, r0, width_n } => corpus::ring(&grid, *amplitude, *r0, *width_n),
        InitialCondition::GroundStateMultiple { factor } => {
            let q = solve_ground_state(cfg, &params, &grid)?;
            let u = q.q.scaled(*factor);
            ground_state = Some(q);
            u
        }
        InitialCondition::FromFile { path } => {
            let snap = Snapshot::read(&cfg.resolve_path(path))?;
            if snap.shape != grid.shape() || snap.lengths != grid.lengths() {
                return Err(HarnessError::Config(format!(
                    "snapshot grid {:?} x {:?} differs from the configured grid",
                    snap.shape, snap.lengths
                )));
            }
            snap.to_field()?
        }
    };
    let u0 = match &cfg.perturbation {
        Some(p) if p.amplitude > 0.0 => {
            let spec = corpus::RandomSpec { amplitude: p.amplitude, ..corpus::RandomSpec::for_grid(&grid) };
            let noise = corpus::random_cylindrical(&grid, &spec, cfg.seed);
            let sum = base.physical().iter().zip(noise.values()).map(|(a, b)| a + b).collect();
            Field64::from_values(&grid, sum)?
        }
        _ => base.into_physical(),
    };
    if ground_state.is_none() && needs_ground_state(&params, cfg.symmetry_class, energy(&u0, &params)) {
        ground_state = Some(solve_ground_state(cfg, &params, &grid)?);
    }
    let verdict = check_criteria(&u0, &params, cfg.symmetry_class, ground_state.as_ref())?;
    Ok(Prepared { grid, params, u0, ground_state, verdict })
}

/// Everything a run produced, as written to disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub summary: Summary,
    pub series: Vec<SeriesRow>,
    pub diagnostics: Vec<DiagnosticRow>,
}

struct Probe<'a> {
    params: &'a Params64,
    weight: &'a CylWeight,
    class: SymmetryClass,
    nodes: usize,
    rhs: bool,
    eta: f64,
    energy0: f64,
}

impl Probe<'_> {
    fn class_variant(&self) -> Variant {
        match self.class {
            SymmetryClass::SigmaN => Variant::Phi,
            SymmetryClass::Sigma => Variant::Psi,
        }
    }

    /// Series and diagnostic rows at one sample; a failed right-hand side
    /// leaves `NaN` columns and returns its message.
    fn measure(&self, smp: &Sample<'_, f64>) -> fracnls::Result<(SeriesRow, DiagnosticRow, Option<String>)> {
        let u = &smp.center.u;
        let t = smp.center.t;
        let s = self.params.s();
        let m_phi = virial_value(u, self.weight, Variant::Phi)?;
        let m_psi = virial_value(u, self.weight, Variant::Psi)?;
        let fd = |variant| -> fracnls::Result<Option<f64>> {
            match (smp.minus, smp.plus) {
                (Some(a), Some(b)) => Ok(Some(centred_difference(
                    virial_value(a, self.weight, variant)?,
                    virial_value(b, self.weight, variant)?,
                    smp.delta,
                ))),
                _ => Ok(None),
            }
        };
        let (fd_phi, fd_psi) = (fd(Variant::Phi)?, fd(Variant::Psi)?);
        let mut diag = DiagnosticRow::empty(t);
        diag.dmdt_fd_phi = fd_phi.unwrap_or(f64::NAN);
        diag.dmdt_fd_psi = fd_psi.unwrap_or(f64::NAN);
        let mut row = SeriesRow {
            t,
            mass: mass(u),
            energy: energy(u, self.params),
            grad_s_norm: sobolev_seminorm(u, s),
            m_phi,
            m_psi,
            dmdt_fd: match self.class_variant() {
                Variant::Phi => diag.dmdt_fd_phi,
                Variant::Psi => diag.dmdt_fd_psi,
            },
            rhs_total: f64::NAN,
            rhs_kinetic: f64::NAN,
            rhs_bilap: f64::NAN,
            rhs_nonlinear: f64::NAN,
            boundary_mass: smp.center.boundary_mass,
        };
        if !self.rhs {
            return Ok((row, diag, None));
        }
        let rhs = (|| {
            let quad = ResolventQuadrature::for_field(s, u, self.nodes)?;
            let ints = rhs_integrals(u, self.weight, &quad, self.params)?;
            let opts = RhsOptions::default();
            let phi = report_from(ints.clone(), m_phi, fd_phi, self.weight.radius(), Variant::Phi, &opts)?;
            let psi = report_from(ints.clone(), m_psi, fd_psi, self.weight.radius(), Variant::Psi, &opts)?;
            Ok::<_, fracnls::Error>((quad.scale(), ints, phi, psi))
        })();
        match rhs {
            Ok((mu, ints, phi, psi)) => {
                let own = if self.class_variant() == Variant::Phi { &phi } else { &psi };
                row.rhs_total = own.terms.total();
                row.rhs_kinetic = own.terms.kinetic;
                row.rhs_bilap = own.terms.bilap;
                row.rhs_nonlinear = own.terms.nonlinear;
                diag.rhs_phi = phi.terms.total();
                diag.relres_phi = phi.relative_residual.unwrap_or(f64::NAN);
                diag.scale_phi = phi.terms.scale();
                diag.leading_phi = ints.leading_bound(Variant::Phi, self.energy0);
                diag.cross_phi = phi.terms.cross;
                diag.rhs_psi = psi.terms.total();
                diag.relres_psi = psi.relative_residual.unwrap_or(f64::NAN);
                diag.scale_psi = psi.terms.scale();
                diag.leading_psi = ints.leading_bound(Variant::Psi, self.energy0);
                diag.cross_psi = psi.terms.cross;
                diag.kinetic_bound = phi.terms.kinetic_bound;
                diag.remainder = ints.measured_remainder();
                diag.quadrature_scale = mu;
                if self.params.is_mass_critical() {
                    let r = refine(&ints, self.eta, self.energy0);
                    diag.refined_leading = r.leading;
                    diag.refined_k1 = r.k1;
                    diag.refined_remainder = r.remainder;
                    diag.refined_bound = r.bound;
                }
                Ok((row, diag, None))
            }
            Err(e) => Ok((row, diag, Some(format!("t = {t}: {e}")))),
        }
    }
}

fn max_finite(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.filter(|v| v.is_finite()).fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// Runs one scenario and writes its bundle into `out`.
///
/// Configuration problems return an error before anything is written. A
/// failure during time stepping still produces a summary with status
/// `numerical-failure`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunOutcome> {
    let prep = prepare(cfg)?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let Prepared { grid, params, u0, ground_state, verdict } = prep;
    Snapshot::from_field(&u0, &params, 0.0).write(&out.join("u0.snap"))?;
    if let Some(q) = &ground_state {
        Snapshot::from_field(&q.q, &params, 0.0).write(&out.join("ground_state.snap"))?;
    }
    let weight = CylWeight::new(Arc::new(CutoffProfile::new()), cfg.cutoff.radius, params.dim())?;
    let controller: Controller = cfg.controller();
    let probe = Probe {
        params: &params,
        weight: &weight,
        class: cfg.symmetry_class,
        nodes: cfg.quadrature.nodes,
        rhs: cfg.diagnostics.rhs,
        eta: cfg.diagnostics.eta,
        energy0: verdict.inputs.energy,
    };
    let initial = Functionals {
        mass: verdict.inputs.mass,
        energy: verdict.inputs.energy,
        grad_s_norm: verdict.inputs.grad_s_norm,
        boundary_mass: boundary_mass_fraction(&u0, BOUNDARY_SHELL),
        m_phi: virial_value(&u0, &weight, Variant::Phi)?,
        m_psi: virial_value(&u0, &weight, Variant::Psi)?,
    };
    let mut detection = DetectionRecord {
        detected: false,
        reason: StopReason::Completed.as_str().into(),
        t_detect: None,
        max_ratio: 1.0,
        t_final: 0.0,
        steps: 0,
        final_dt: controller.dt0,
        final_boundary_mass: initial.boundary_mass,
        max_mass_drift: 0.0,
        ratio_threshold: controller.detection_ratio,
        persistence: controller.persistence,
        min_dt: controller.min_dt,
        boundary_threshold: controller.boundary_threshold,
    };
    let mut series = Vec::new();
    let mut diagnostics = Vec::new();
    let mut errors = Vec::new();
    let mut growth_fit = None;
    let mut growth = vec![(0.0, 1.0)];
    let mut error = None;
    let mut final_state = u0.clone();

    let status = if controller.t_end == 0.0 {
        if initial.boundary_mass > controller.boundary_threshold {
            detection.reason = StopReason::DomainTooSmall.as_str().into();
            Status::DomainBreach
        } else {
            Status::Completed
        }
    } else {
        let mut prop = Propagator::new(&params, &grid)?;
        if cfg.numerics.dealias {
            prop = prop.with_dealiasing();
        }
        let state = SimulationState::new(u0.clone(), &params, controller.dt0)?;
        let run = evolve(&mut prop, state, &controller, |smp| {
            let (row, diag, err) = probe.measure(smp)?;
            series.push(row);
            diagnostics.push(diag);
            errors.extend(err);
            Ok(())
        });
        match run {
            Ok(o) => {
                let v = &o.verdict;
                detection.detected = v.detected;
                detection.reason = v.reason.as_str().into();
                detection.t_detect = v.t_detect;
                detection.max_ratio = v.max_ratio;
                detection.t_final = o.state.t;
                detection.steps = o.state.steps;
                detection.final_dt = o.state.dt;
                detection.final_boundary_mass = o.state.boundary_mass;
                detection.max_mass_drift = o.max_mass_drift;
                growth_fit = fit_growth(&v.growth).map(|f| GrowthFitRecord {
                    exponent: f.exponent,
                    ci_low: f.ci_low,
                    ci_high: f.ci_high,
                    t_start: f.t_start,
                    points: f.points,
                });
                growth = v.growth.clone();
                final_state = o.state.u.clone();
                detection.t_final = o.state.t;
                let status = Status::from_reason(v.reason);
                if status == Status::Completed && o.state.boundary_mass > controller.boundary_threshold {
                    Status::DomainBreach
                } else {
                    status
                }
            }
            Err(e) => {
                error = Some(e.to_string());
                Status::NumericalFailure
            }
        }
    };

    let summary = Summary {
        name: cfg.name.clone(),
        status,
        exit_code: status.exit_code(),
        params: ParamsRecord {
            dim: params.dim(),
            s: params.s(),
            sigma: params.sigma(),
            shape: grid.shape().to_vec(),
            lengths: grid.lengths().to_vec(),
            radius: cfg.cutoff.radius,
            symmetry_class: cfg.symmetry_class,
            initial: cfg.initial.kind().into(),
            seed: cfg.seed,
        },
        s_c: verdict.s_c,
        criteria: verdict,
        initial,
        detection,
        growth_fit,
        ground_state: ground_state.as_ref().map(GroundStateRecord::from_result),
        diagnostics: DiagnosticsRecord {
            samples: series.len(),
            max_relres_phi: max_finite(diagnostics.iter().map(|d| d.relres_phi)),
            max_relres_psi: max_finite(diagnostics.iter().map(|d| d.relres_psi)),
            errors,
        },
        error,
    };

    write_atomic(&out.join("series.csv"), &render_csv(&SERIES_COLUMNS, series.iter().map(SeriesRow::cells))?)?;
    write_atomic(
        &out.join("diagnostics.csv"),
        &render_csv(&DIAGNOSTIC_COLUMNS, diagnostics.iter().map(DiagnosticRow::cells))?,
    )?;
    write_atomic(
        &out.join("growth.csv"),
        &render_csv(&["t", "grad_ratio"], growth.iter().map(|&(t, g)| vec![fmt_f64(t), fmt_f64(g)]))?,
    )?;
    Snapshot::from_field(&final_state, &params, summary.detection.t_final).write(&out.join("final.snap"))?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(RunOutcome { status, summary, series, diagnostics })
}

/// The identity at `t = 0` for both variants, with the quadrature checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialCheck {
    pub radius: f64,
    pub quadrature_scale: f64,
    /// Largest closed-form error over the gate ratios.
    pub gate_error: f64,
    pub balakrishnan_lhs: f64,
    pub balakrishnan_rhs: f64,
    pub balakrishnan_error: f64,
    pub m_phi: f64,
    pub dmdt_fd_phi: f64,
    pub rhs_phi: f64,
    pub relres_phi: f64,
    pub m_psi: f64,
    pub dmdt_fd_psi: f64,
    pub rhs_psi: f64,
    pub relres_psi: f64,
    pub cross_phi: f64,
    pub cross_psi: f64,
    pub kinetic_bound: f64,
    pub remainder: f64,
    pub criteria: CriterionVerdict,
}

pub fn virial_check(cfg: &ScenarioConfig) -> Result<VirialCheck> {
    let prep = prepare(cfg)?;
    let params = &prep.params;
    let s = params.s();
    let weight = CylWeight::new(Arc::new(CutoffProfile::new()), cfg.cutoff.radius, params.dim())?;
    let quad = ResolventQuadrature::for_field(s, &prep.u0, cfg.quadrature.nodes)?;
    let gate_error = GATE_RATIOS.iter().map(|&a| quad.beta_error(a * quad.scale())).fold(0.0, f64::max);
    let bal = balakrishnan_check(&prep.u0, &quad)?;
    let delta = if cfg.time.fd_delta > 0.0 { cfg.time.fd_delta } else { 1e-3 };
    let controller = Controller { t_end: 0.0, sample_interval: 0.0, fd_delta: Some(delta), ..cfg.controller() };
    let probe = Probe {
        params,
        weight: &weight,
        class: cfg.symmetry_class,
        nodes: cfg.quadrature.nodes,
        rhs: true,
        eta: cfg.diagnostics.eta,
        energy0: prep.verdict.inputs.energy,
    };
    let mut prop = Propagator::new(params, &prep.grid)?;
    if cfg.numerics.dealias {
        prop = prop.with_dealiasing();
    }
    let mut rows = None;
    evolve(&mut prop, SimulationState::new(prep.u0.clone(), params, controller.dt0)?, &controller, |smp| {
        rows = Some(probe.measure(smp)?);
        Ok(())
    })?;
    let (row, diag, err) = rows.ok_or_else(|| HarnessError::Diagnostic("no sample at t = 0".into()))?;
    if let Some(e) = err {
        return Err(HarnessError::Diagnostic(e));
    }
    Ok(VirialCheck {
        radius: cfg.cutoff.radius,
        quadrature_scale: quad.scale(),
        gate_error,
        balakrishnan_lhs: bal.lhs,
        balakrishnan_rhs: bal.rhs,
        balakrishnan_error: bal.relative_error,
        m_phi: row.m_phi,
        dmdt_fd_phi: diag.dmdt_fd_phi,
        rhs_phi: diag.rhs_phi,
        relres_phi: diag.relres_phi,
        m_psi: row.m_psi,
        dmdt_fd_psi: diag.dmdt_fd_psi,
        rhs_psi: diag.rhs_psi,
        relres_psi: diag.relres_psi,
        cross_phi: diag.cross_phi,
        cross_psi: diag.cross_psi,
        kinetic_bound: diag.kinetic_bound,
        remainder: diag.remainder,
        criteria: prep.verdict,
    })
}
