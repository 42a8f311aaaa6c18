//! Strang-split time integration with adaptive steps, exact sampling times
//! for centred differences, and blow-up detection.

use std::sync::Arc;

use num_complex::Complex;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{boundary_mass_fraction, energy, mass, sobolev_seminorm};

/// Exact-substep Strang propagator for `i u_t = (-Delta)^s u - c |u|^{2 sigma} u`.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    grid: Arc<Grid<T>>,
    s: T,
    sigma: T,
    coupling: T,
    dispersion: Vec<T>,
    keep: Vec<bool>,
    cached: Option<(f64, Vec<Complex<T>>)>,
}

impl<T: Real> Propagator<T> {
    pub fn new(params: &ModelParams<T>, grid: &Arc<Grid<T>>) -> Result<Self> {
        if params.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "N = {} parameters on a {}-dimensional grid",
                params.dim(),
                grid.dim()
            )));
        }
        let s = params.s();
        let ksq = grid.k_squared();
        let dispersion = ksq.iter().map(|&k2| k2.powf(s)).collect();
        let keep = vec![true; grid.len()];
        Ok(Self { grid: grid.clone(), s, sigma: params.sigma(), coupling: T::one(), dispersion, keep, cached: None })
    }

    /// Drops the nonlinearity (coupling 0).
    pub fn linear(mut self) -> Self {
        self.coupling = T::zero();
        self
    }

    /// Enables the 2/3-rule mask on the spectrum in the linear substep.
    pub fn with_dealiasing(mut self) -> Self {
        let grid = self.grid.clone();
        grid.for_each_index(|flat, idx| {
            self.keep[flat] = idx.iter().zip(grid.shape()).all(|(&i, &n)| {
                let j = if i <= n / 2 { i } else { n - i };
                3 * j <= n
            });
        });
        self.cached = None;
        self
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    fn nonlinear(&self, u: &mut [Complex<T>], dt: f64) {
        if self.coupling == T::zero() {
            return;
        }
        let c = self.coupling * lit::<T>(dt);
        for v in u.iter_mut() {
            let phase = c * v.norm_sqr().powf(self.sigma);
            *v *= Complex::from_polar(T::one(), phase);
        }
    }

    fn phases(&mut self, dt: f64) -> &[Complex<T>] {
        if self.cached.as_ref().map(|c| c.0) != Some(dt) {
            let table = self
                .dispersion
                .iter()
                .zip(&self.keep)
                .map(|(&w, &k)| if k { Complex::from_polar(T::one(), -w * lit::<T>(dt)) } else { Complex::default() })
                .collect();
            self.cached = Some((dt, table));
        }
        &self.cached.as_ref().expect("filled above").1
    }

    /// One Strang step of size `dt` (negative `dt` runs backwards) on physical
    /// samples; returns `||(-Delta)^{s/2} u||_2^2` measured in the linear substep.
    pub fn step(&mut self, u: &mut [Complex<T>], dt: f64) -> Result<T> {
        self.nonlinear(u, 0.5 * dt);
        let grid = self.grid.clone();
        grid.forward(u);
        let phases = self.phases(dt).to_vec();
        let mut g2 = T::zero();
        for ((v, p), &w) in u.iter_mut().zip(&phases).zip(&self.dispersion) {
            *v *= *p;
            g2 += w * v.norm_sqr();
        }
        grid.inverse(u);
        self.nonlinear(u, 0.5 * dt);
        let bad = u.iter().filter(|v| !(v.re.is_finite() && v.im.is_finite())).count();
        if bad > 0 {
            return Err(Error::NonFinite { count: bad, total: u.len() });
        }
        Ok(g2 * grid.cell_volume() / lit::<T>(grid.len() as f64))
    }
}

#[derive(Clone, Debug)]
pub struct SimulationState<T: Real> {
    pub t: f64,
    pub u: Field<T>,
    pub dt: f64,
    pub mass0: T,
    pub energy0: T,
    pub grad0: T,
    pub steps: usize,
    pub boundary_mass: T,
}

pub const BOUNDARY_SHELL: f64 = 0.1;

impl<T: Real> SimulationState<T> {
    pub fn new(u0: Field<T>, params: &ModelParams<T>, dt0: f64) -> Result<Self> {
        u0.check_finite()?;
        if !(dt0 > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt0}")));
        }
        let u = u0.into_physical();
        Ok(Self {
            t: 0.0,
            mass0: mass(&u),
            energy0: energy(&u, params),
            grad0: sobolev_seminorm(&u, params.s()),
            boundary_mass: boundary_mass_fraction(&u, lit(BOUNDARY_SHELL)),
            u,
            dt: dt0,
            steps: 0,
        })
    }

    pub fn mass_drift(&self) -> T {
        let m0 = self.mass0;
        if m0 > T::zero() {
            (mass(&self.u) - m0).abs() / m0
        } else {
            T::zero()
        }
    }
}

/// Advances `state` by one Strang step of size `dt`.
pub fn strang_step<T: Real>(
    prop: &mut Propagator<T>,
    state: &SimulationState<T>,
    dt: f64,
) -> Result<SimulationState<T>> {
    let mut next = state.clone();
    let mut vals = next.u.clone().into_values();
    prop.step(&mut vals, dt)?;
    next.u = Field::from_values(prop.grid(), vals)?;
    next.t += dt;
    next.steps += 1;
    Ok(next)
}

#[derive(Clone, Debug)]
pub struct Controller {
    pub dt0: f64,
    pub t_end: f64,
    /// Spacing of recorded samples; `0` records only `t = 0` and the end.
    pub sample_interval: f64,
    /// Offset of the centred difference around each sample time; `None` skips it.
    pub fd_delta: Option<f64>,
    pub adaptive: bool,
    pub detection_ratio: f64,
    pub persistence: usize,
    pub min_dt: f64,
    pub boundary_threshold: f64,
}

impl Default for Controller {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            t_end: 1.0,
            sample_interval: 0.05,
            fd_delta: Some(1e-3),
            adaptive: true,
            detection_ratio: 50.0,
            persistence: 10,
            min_dt: 1e-12,
            boundary_threshold: 1e-8,
        }
    }
}

impl Controller {
    /// Exponent of the adaptive rule `dt = dt0 min(1, (G0 / G)^p)`.
    pub fn adaptive_exponent<T: Real>(params: &ModelParams<T>) -> f64 {
        to_f64((params.sigma() + params.s()) / params.s())
    }

    fn sample_times(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        if self.sample_interval > 0.0 {
            let n = (self.t_end / self.sample_interval + 1e-9).floor() as usize;
            out.extend((1..=n).map(|i| i as f64 * self.sample_interval));
        }
        if self.t_end > 0.0 && out.last().is_none_or(|&t| (self.t_end - t).abs() > 1e-12) {
            out.push(self.t_end);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Completed,
    GradientGrowth,
    StepCollapse,
    DomainTooSmall,
    NonFinite,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Completed => "completed",
            StopReason::GradientGrowth => "gradient growth",
            StopReason::StepCollapse => "step collapse",
            StopReason::DomainTooSmall => "domain too small",
            StopReason::NonFinite => "non-finite values",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlowupVerdict {
    pub detected: bool,
    pub reason: StopReason,
    pub t_detect: Option<f64>,
    pub max_ratio: f64,
    /// `(t, G(t) / G(0))` after every step.
    pub growth: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub t_start: f64,
    pub points: usize,
}

/// Least-squares slope of `log G` against `log t` over the latter half of
/// the series, with a 95% confidence interval.
pub fn fit_growth(series: &[(f64, f64)]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(t, g)| *t > 0.0 && *g > 0.0).map(|(t, g)| (t.ln(), g.ln())).collect();
    let tail = &pts[pts.len() / 2..];
    let n = tail.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = tail.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let se = (resid / (nf - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.975);
    Some(GrowthFit {
        exponent: slope,
        ci_low: slope - q * se,
        ci_high: slope + q * se,
        t_start: tail[0].0.exp(),
        points: n,
    })
}

/// States around one sample time; `minus`/`plus` are `delta` away.
pub struct Sample<'a, T: Real> {
    pub center: &'a SimulationState<T>,
    pub minus: Option<&'a Field<T>>,
    pub plus: Option<&'a Field<T>>,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionOutcome<T: Real> {
    pub state: SimulationState<T>,
    pub verdict: BlowupVerdict,
    pub max_mass_drift: T,
}

struct Monitor {
    g0_sq: f64,
    ratio: f64,
    streak: usize,
    max_ratio: f64,
    growth: Vec<(f64, f64)>,
}

/// Integrates to `controller.t_end`, calling `observer` at every sample time
/// with the neighbouring states for centred differences.
pub fn evolve<T: Real>(
    prop: &mut Propagator<T>,
    state: SimulationState<T>,
    controller: &Controller,
    mut observer: impl FnMut(&Sample<'_, T>) -> Result<()>,
) -> Result<EvolutionOutcome<T>> {
    let c = controller;
    if !(c.t_end >= state.t) {
        return Err(Error::InvalidArgument(format!("end time {} before current time {}", c.t_end, state.t)));
    }
    let grad0 = to_f64(state.grad0);
    let mut mon = Monitor { g0_sq: grad0 * grad0, ratio: 1.0, streak: 0, max_ratio: 1.0, growth: vec![(state.t, 1.0)] };
    let times = c.sample_times();
    let delta = c.fd_delta.filter(|d| *d > 0.0);
    let shell = boundary_shell_mask(prop.grid());
    let mut state = state;
    let mut max_drift = T::zero();
    let mut reason = StopReason::Completed;
    let mut t_detect = None;

    'outer: for &ts in &times {
        // state at ts - delta (backwards from t = 0 for the first sample)
        let minus = match delta {
            Some(d) if ts - d < state.t - 1e-15 => {
                let back_by = state.t - (ts - d);
                let mut back = state.u.clone().into_values();
                let n = (back_by / c.dt0).ceil().max(1.0) as usize;
                for _ in 0..n {
                    prop.step(&mut back, -back_by / n as f64)?;
                }
                Some(Field::from_values(prop.grid(), back)?)
            }
            Some(d) => {
                if let Some(r) = advance(prop, &mut state, ts - d, c, &mut mon, &shell)? {
                    reason = r;
                    break 'outer;
                }
                Some(state.u.clone())
            }
            None => None,
        };
        if let Some(r) = advance(prop, &mut state, ts, c, &mut mon, &shell)? {
            reason = r;
            break;
        }
        let center = state.clone();
        let plus = match delta {
            Some(d) => {
                if let Some(r) = advance(prop, &mut state, ts + d, c, &mut mon, &shell)? {
                    reason = r;
                    break;
                }
                Some(state.u.clone())
            }
            None => None,
        };
        max_drift = max_drift.max(center.mass_drift());
        observer(&Sample { center: &center, minus: minus.as_ref(), plus: plus.as_ref(), delta: delta.unwrap_or(0.0) })?;
        if delta.is_some() && ts >= c.t_end {
            // the end state is the centre, not the overshoot
            state = center;
        }
    }
    if reason == StopReason::GradientGrowth {
        t_detect = Some(state.t);
    }
    max_drift = max_drift.max(state.mass_drift());
    let detected = matches!(reason, StopReason::GradientGrowth | StopReason::StepCollapse | StopReason::NonFinite);
    Ok(EvolutionOutcome {
        state,
        verdict: BlowupVerdict { detected, reason, t_detect, max_ratio: mon.max_ratio, growth: mon.growth },
        max_mass_drift: max_drift,
    })
}

fn boundary_shell_mask<T: Real>(grid: &Grid<T>) -> Vec<bool> {
    let limits: Vec<f64> = grid.lengths().iter().map(|&l| (1.0 - BOUNDARY_SHELL) * to_f64(l) * 0.5).collect();
    let mut mask = vec![false; grid.len()];
    grid.for_each_point(|flat, x| {
        mask[flat] = x.iter().zip(&limits).any(|(&xi, &lim)| to_f64(xi).abs() >= lim);
    });
    mask
}

/// Steps `state` to exactly `target`, applying the adaptive rule and the
/// stopping tests. Returns a stop reason if the run must end.
fn advance<T: Real>(
    prop: &mut Propagator<T>,
    state: &mut SimulationState<T>,
    target: f64,
    c: &Controller,
    mon: &mut Monitor,
    shell: &[bool],
) -> Result<Option<StopReason>> {
    let p = to_f64((prop.sigma + prop.s) / prop.s);
    let mut vals = std::mem::replace(&mut state.u, Field::zeros(prop.grid())).into_values();
    let mut stop = None;
    while target - state.t > 1e-13 * target.abs().max(1.0) {
        let dt_rule = if c.adaptive && mon.ratio > 1.0 { c.dt0 * mon.ratio.powf(-p) } else { c.dt0 };
        if dt_rule < c.min_dt {
            stop = Some(StopReason::StepCollapse);
            break;
        }
        let remaining = target - state.t;
        // avoid a sliver step right before the target
        let dt = if remaining <= dt_rule * 1.000_001 {
            remaining
        } else if remaining < 2.0 * dt_rule {
            0.5 * remaining
        } else {
            dt_rule
        };
        let g2 = match prop.step(&mut vals, dt) {
            Ok(g2) => to_f64(g2),
            Err(Error::NonFinite { .. }) => {
                stop = Some(StopReason::NonFinite);
                break;
            }
            Err(e) => return Err(e),
        };
        state.t = if (target - state.t - dt).abs() <= 1e-13 * target.abs().max(1.0) { target } else { state.t + dt };
        state.dt = dt;
        state.steps += 1;
        mon.ratio = if mon.g0_sq > 0.0 { (g2 / mon.g0_sq).sqrt() } else { 1.0 };
        mon.max_ratio = mon.max_ratio.max(mon.ratio);
        mon.growth.push((state.t, mon.ratio));
        if mon.ratio >= c.detection_ratio {
            mon.streak += 1;
            if mon.streak >= c.persistence {
                stop = Some(StopReason::GradientGrowth);
                break;
            }
        } else {
            mon.streak = 0;
        }
        let (mut outer, mut total) = (0.0, 0.0);
        for (v, &m) in vals.iter().zip(shell) {
            let w = to_f64(v.norm_sqr());
            total += w;
            if m {
                outer += w;
            }
        }
        let frac = if total > 0.0 { outer / total } else { 0.0 };
        if frac > c.boundary_threshold {
            state.boundary_mass = lit(frac);
            stop = Some(StopReason::DomainTooSmall);
            break;
        }
    }
    state.u = Field::from_values(prop.grid(), vals)?;
    state.boundary_mass = boundary_mass_fraction(&state.u, lit(BOUNDARY_SHELL));
    Ok(stop)
}
