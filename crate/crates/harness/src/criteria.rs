//! Which sets of blow-up hypotheses the initial data meets.
//!
//! Three hypothesis sets are checked:
//!
//! * `supercritical_sigma_n`: `N >= 3`, `1/2 < s < 1`, `0 < s_c <= s`,
//!   `sigma <= s`, data in `Sigma_N`, and either `E < 0` or both threshold
//!   conditions against the ground state;
//! * `mass_critical_sigma_n`: `N >= 3`, `1/2 < s < 1`, `s_c = 0`,
//!   `sigma <= s`, data in `Sigma_N`, `E < 0`;
//! * `supercritical_sigma`: `N >= 4`, `1/2 < s < 1`, `0 < s_c <= s`,
//!   `2s/(N-1) < sigma <= s`, data in `Sigma`, `E < 0`.
//!
//! The designated branch is the first satisfied of mass-critical,
//! negative-energy, threshold-pair and sigma-class.

use fracnls::ground_state::GroundStateResult;
use fracnls::params::CRITICAL_TOL;
use fracnls::spectral::{energy, mass, sobolev_seminorm};
use fracnls::{Field64, Params64};
use serde::{Deserialize, Serialize};

use crate::config::SymmetryClass;
use crate::error::{HarnessError, Result};

/// Largest accepted `y`-symmetry deviation, relative to `max(sup |u|, 1)`.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    NegativeEnergy,
    ThresholdPair,
    MassCritical,
    SigmaClass,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::NegativeEnergy => "negative-energy",
            Branch::ThresholdPair => "threshold-pair",
            Branch::MassCritical => "mass-critical",
            Branch::SigmaClass => "sigma-class",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub satisfied: bool,
    /// Conditions that fail, in the order they are listed above.
    pub unmet: Vec<String>,
}

impl HypothesisCheck {
    fn from_conditions(conds: &[(bool, &str)]) -> Self {
        let unmet: Vec<String> = conds.iter().filter(|(ok, _)| !ok).map(|(_, name)| name.to_string()).collect();
        Self { satisfied: unmet.is_empty(), unmet }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub supercritical_sigma_n: HypothesisCheck,
    pub mass_critical_sigma_n: HypothesisCheck,
    pub supercritical_sigma: HypothesisCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub energy: f64,
    pub mass: f64,
    /// `||(-Delta)^{s/2} u0||_2`.
    pub grad_s_norm: f64,
}

/// Both sides of the two threshold conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub energy_q: f64,
    pub mass_q: f64,
    pub grad_s_norm_q: f64,
    /// `E[u0]^{s_c} M[u0]^{s - s_c}` against the same product for `Q`.
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    pub energy_condition: bool,
    /// `||(-Delta)^{s/2} u0||^2 ||u0||^{s - s_c}` against the same product for `Q`.
    pub gradient_lhs: f64,
    pub gradient_rhs: f64,
    pub gradient_condition: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    MassSubcritical,
    MassCritical,
    MassSupercritical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub s_c: f64,
    pub regime: Regime,
    pub symmetry_class: SymmetryClass,
    pub branch: Option<Branch>,
    /// Why no branch applies; `None` when a branch is designated.
    pub reason: Option<String>,
    pub inputs: Inputs,
    pub thresholds: Option<ThresholdRecord>,
    pub hypotheses: Hypotheses,
    pub symmetry_deviation: f64,
}

fn structural(params: &Params64) -> (usize, f64, f64, f64) {
    (params.dim(), params.s(), params.sigma(), params.s_c())
}

/// True when the verdict cannot be decided without a ground state: the
/// supercritical `Sigma_N` set holds apart from the energy sign, and the
/// energy is nonnegative.
pub fn needs_ground_state(params: &Params64, class: SymmetryClass, energy0: f64) -> bool {
    let (n, s, sigma, s_c) = structural(params);
    energy0 >= 0.0
        && n >= 3
        && s > 0.5
        && s < 1.0
        && s_c > CRITICAL_TOL
        && s_c <= s + CRITICAL_TOL
        && sigma <= s
        && class == SymmetryClass::SigmaN
}

/// Evaluates all three hypothesis sets for `u0`.
///
/// `q` must be the ground state of the same equation whenever
/// [`needs_ground_state`] holds.
pub fn check_criteria(
    u0: &Field64,
    params: &Params64,
    class: SymmetryClass,
    q: Option<&GroundStateResult<f64>>,
) -> Result<CriterionVerdict> {
    if u0.grid().dim() != params.dim() {
        return Err(HarnessError::Config(format!(
            "field has dimension {}, parameters have N = {}",
            u0.grid().dim(),
            params.dim()
        )));
    }
    u0.check_finite()?;
    let deviation = u0.y_symmetry_deviation();
    let allowed = SYMMETRY_TOL * u0.sup_norm().max(1.0);
    if deviation > allowed {
        return Err(HarnessError::Config(format!(
            "initial data is not cylindrically symmetric: deviation {deviation:e} exceeds {allowed:e}"
        )));
    }
    let (n, s, sigma, s_c) = structural(params);
    let inputs = Inputs { energy: energy(u0, params), mass: mass(u0), grad_s_norm: sobolev_seminorm(u0, s) };
    let e = inputs.energy;
    let regime = if s_c.abs() <= CRITICAL_TOL {
        Regime::MassCritical
    } else if s_c > 0.0 {
        Regime::MassSupercritical
    } else {
        Regime::MassSubcritical
    };

    let thresholds = if needs_ground_state(params, class, e) {
        let q = q.ok_or_else(|| {
            HarnessError::Config(
                "E[u0] >= 0 in the supercritical range: the threshold conditions need the ground state Q; \
                 compute it first (`fracnls ground-state`) or use a scenario run, which solves for Q"
                    .into(),
            )
        })?;
        let qp = &q.params;
        if qp.dim() != n || qp.s() != s || qp.sigma() != sigma {
            return Err(HarnessError::Config("ground state was computed for different parameters".into()));
        }
        let cmp = q.thresholds(params)?.evaluate(u0, params);
        Some(ThresholdRecord {
            energy_q: q.energy,
            mass_q: q.mass,
            grad_s_norm_q: q.grad_s_norm,
            energy_lhs: cmp.energy_lhs,
            energy_rhs: cmp.energy_rhs,
            energy_condition: cmp.energy_condition,
            gradient_lhs: cmp.gradient_lhs,
            gradient_rhs: cmp.gradient_rhs,
            gradient_condition: cmp.gradient_condition,
        })
    } else {
        None
    };
    let pair = thresholds.as_ref().is_some_and(|t| t.energy_condition && t.gradient_condition);

    let dim3 = n >= 3;
    let s_range = s > 0.5 && s < 1.0;
    let supercritical = s_c > CRITICAL_TOL && s_c <= s + CRITICAL_TOL;
    let sigma_le_s = sigma <= s;
    let sigma_n = class == SymmetryClass::SigmaN;
    let negative = e < 0.0;
    let hypotheses = Hypotheses {
        supercritical_sigma_n: HypothesisCheck::from_conditions(&[
            (dim3, "N >= 3"),
            (s_range, "1/2 < s < 1"),
            (supercritical, "0 < s_c <= s"),
            (sigma_le_s, "sigma <= s"),
            (sigma_n, "data in Sigma_N"),
            (negative || pair, "E < 0 or both threshold conditions"),
        ]),
        mass_critical_sigma_n: HypothesisCheck::from_conditions(&[
            (dim3, "N >= 3"),
            (s_range, "1/2 < s < 1"),
            (s_c.abs() <= CRITICAL_TOL, "s_c = 0"),
            (sigma_le_s, "sigma <= s"),
            (sigma_n, "data in Sigma_N"),
            (negative, "E < 0"),
        ]),
        supercritical_sigma: HypothesisCheck::from_conditions(&[
            (n >= 4, "N >= 4"),
            (s_range, "1/2 < s < 1"),
            (supercritical, "0 < s_c <= s"),
            (n >= 2 && sigma > 2.0 * s / (n as f64 - 1.0), "sigma > 2s/(N-1)"),
            (sigma_le_s, "sigma <= s"),
            // Sigma_N data is in particular cylindrically symmetric
            (true, "data in Sigma"),
            (negative, "E < 0"),
        ]),
    };

    let h = &hypotheses;
    let branch = if h.mass_critical_sigma_n.satisfied {
        Some(Branch::MassCritical)
    } else if h.supercritical_sigma_n.satisfied {
        Some(if negative { Branch::NegativeEnergy } else { Branch::ThresholdPair })
    } else if h.supercritical_sigma.satisfied {
        Some(Branch::SigmaClass)
    } else {
        None
    };
    let reason = branch.is_none().then(|| {
        format!(
            "no hypothesis set holds: supercritical Sigma_N fails [{}]; mass-critical Sigma_N fails [{}]; \
             supercritical Sigma fails [{}]",
            h.supercritical_sigma_n.unmet.join(", "),
            h.mass_critical_sigma_n.unmet.join(", "),
            h.supercritical_sigma.unmet.join(", ")
        )
    });
    Ok(CriterionVerdict {
        s_c,
        regime,
        symmetry_class: class,
        branch,
        reason,
        inputs,
        thresholds,
        hypotheses,
        symmetry_deviation: deviation,
    })
}
