//! Ground states of `(-Delta)^s Q + Q - |Q|^{2 sigma} Q = 0` by Petviashvili
//! iteration, and the threshold quantities built from them.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{energy, mass, sobolev_seminorm};

#[derive(Clone, Copy, Debug)]
pub struct PetviashviliOptions {
    pub change_tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Admissible range of the stabilizing factor; leaving it counts as divergence.
    pub stabilizer_range: (f64, f64),
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        Self { change_tol: 1e-10, residual_tol: 1e-8, max_iter: 5000, stabilizer_range: (1e-6, 1e6) }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult<T: Real> {
    pub q: Field<T>,
    pub params: ModelParams<T>,
    /// `sup |(-Delta)^s Q + Q - Q^{2 sigma + 1}|`.
    pub residual: T,
    pub iterations: usize,
    pub mass: T,
    pub energy: T,
    /// `||(-Delta)^{s/2} Q||_2`.
    pub grad_s_norm: T,
}

/// `sup |(-Delta)^s u + u - |u|^{2 sigma} u|` on the grid.
pub fn equation_residual<T: Real>(u: &Field<T>, params: &ModelParams<T>) -> Result<T> {
    u.check_finite()?;
    let spec = u.spectrum();
    let ksq = u.grid().k_squared();
    let mut lin: Vec<Complex<T>> = spec.iter().zip(ksq).map(|(v, &k2)| *v * (k2.powf(params.s()) + T::one())).collect();
    u.grid().inverse(&mut lin);
    let phys = u.physical();
    Ok(lin.iter().zip(phys.iter()).fold(T::zero(), |m, (l, v)| {
        let nl = *v * v.norm_sqr().powf(params.sigma());
        m.max((*l - nl).norm())
    }))
}

/// Petviashvili iteration `Q <- S^gamma K(|Q|^{2 sigma} Q)` with
/// `K = ((-Delta)^s + 1)^{-1}`, `gamma = (2 sigma + 1) / (2 sigma)`.
pub fn petviashvili<T: Real>(
    params: &ModelParams<T>,
    seed: &Field<T>,
    opts: &PetviashviliOptions,
) -> Result<GroundStateResult<T>> {
    seed.check_finite()?;
    let grid: Arc<Grid<T>> = seed.grid().clone();
    let s = params.s();
    let sigma = params.sigma();
    let gamma = (lit::<T>(2.0) * sigma + T::one()) / (lit::<T>(2.0) * sigma);
    let symbol: Vec<T> = grid.k_squared().iter().map(|&k2| k2.powf(s) + T::one()).collect();

    let mut q: Vec<Complex<T>> = seed.physical().iter().map(|v| Complex::new(v.re, T::zero())).collect();
    let mut trace = Vec::new();
    let (mut change, mut residual) = (f64::INFINITY, f64::INFINITY);
    for it in 1..=opts.max_iter {
        let mut q_hat = q.clone();
        grid.forward(&mut q_hat);
        let mut n_hat: Vec<Complex<T>> =
            q.iter().map(|v| Complex::new(v.re * v.re.abs().powf(sigma + sigma), T::zero())).collect();
        grid.forward(&mut n_hat);
        let (mut num, mut den) = (T::zero(), T::zero());
        for ((qh, nh), &l) in q_hat.iter().zip(&n_hat).zip(&symbol) {
            num += l * qh.norm_sqr();
            den += (nh.conj() * qh).re;
        }
        let stab = to_f64(num / den);
        trace.push(stab);
        if !(stab >= opts.stabilizer_range.0 && stab <= opts.stabilizer_range.1) {
            return Err(Error::Divergence { iterations: it, stabilizer: stab, trace });
        }
        let factor: T = lit::<T>(stab).powf(gamma);
        let mut next: Vec<Complex<T>> = n_hat.iter().zip(&symbol).map(|(nh, &l)| *nh * (factor / l)).collect();
        grid.inverse(&mut next);
        next.iter_mut().for_each(|v| v.im = T::zero());

        let (mut diff, mut norm) = (T::zero(), T::zero());
        for (a, b) in next.iter().zip(&q) {
            diff += (a.re - b.re) * (a.re - b.re);
            norm += a.re * a.re;
        }
        change = to_f64((diff / norm).sqrt());
        q = next;
        if change < opts.change_tol {
            let field = Field::from_values(&grid, q.clone())?;
            residual = to_f64(equation_residual(&field, params)?);
            if residual < opts.residual_tol {
                return Ok(finish(field, params, lit(residual), it));
            }
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, change, residual })
}

fn finish<T: Real>(q: Field<T>, params: &ModelParams<T>, residual: T, iterations: usize) -> GroundStateResult<T> {
    let m = mass(&q);
    let e = energy(&q, params);
    let g = sobolev_seminorm(&q, params.s());
    GroundStateResult { q, params: *params, residual, iterations, mass: m, energy: e, grad_s_norm: g }
}

/// Default seed `exp(-|x|^2 / 2)`.
pub fn gaussian_seed<T: Real>(grid: &Arc<Grid<T>>) -> Field<T> {
    Field::from_real_fn(grid, |x| {
        let r2 = x.iter().fold(T::zero(), |a, &v| a + v * v);
        (-r2 / lit(2.0)).exp()
    })
}

/// Right-hand sides of the two threshold conditions, computed from `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub s_c: f64,
    pub energy_q: f64,
    pub grad_s_norm_q: f64,
    /// `E[Q]^{s_c} M[Q]^{s - s_c}`; absent when `s_c = s`.
    pub energy_product: Option<f64>,
    /// `||(-Delta)^{s/2} Q||_2^2 ||Q||_2^{s - s_c}`; absent when `s_c = s`.
    pub gradient_product: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdComparison {
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    /// Energy-type condition holds strictly (`lhs < rhs`).
    pub energy_condition: bool,
    pub gradient_lhs: f64,
    pub gradient_rhs: f64,
    /// Gradient-type condition holds strictly (`lhs > rhs`).
    pub gradient_condition: bool,
}

/// Relative slack below which two sides are treated as equal.
pub const THRESHOLD_EQUALITY_TOL: f64 = 1e-8;

impl Thresholds {
    pub fn is_energy_critical(&self, s: f64) -> bool {
        (self.s_c - s).abs() < 1e-12
    }

    /// Evaluates both conditions for candidate data `u0`.
    pub fn evaluate<T: Real>(&self, u0: &Field<T>, params: &ModelParams<T>) -> ThresholdComparison {
        let s = to_f64(params.s());
        let e = to_f64(energy(u0, params));
        let m = to_f64(mass(u0));
        let g = to_f64(sobolev_seminorm(u0, params.s()));
        let (energy_lhs, energy_rhs, gradient_lhs, gradient_rhs) = match (self.energy_product, self.gradient_product) {
            (Some(ep), Some(gp)) => {
                (e.max(0.0).powf(self.s_c) * m.powf(s - self.s_c), ep, g * g * m.sqrt().powf(s - self.s_c), gp)
            }
            _ => (e, self.energy_q, g, self.grad_s_norm_q),
        };
        let tol = THRESHOLD_EQUALITY_TOL;
        ThresholdComparison {
            energy_lhs,
            energy_rhs,
            energy_condition: energy_lhs < energy_rhs * (1.0 - tol),
            gradient_lhs,
            gradient_rhs,
            gradient_condition: gradient_lhs > gradient_rhs * (1.0 + tol),
        }
    }
}

impl<T: Real> GroundStateResult<T> {
    /// Threshold record; only meaningful in the mass-supercritical range.
    pub fn thresholds(&self, params: &ModelParams<T>) -> Result<Thresholds> {
        let s_c = to_f64(params.s_c());
        let s = to_f64(params.s());
        if !(s_c > 1e-12) {
            return Err(Error::Params(format!("threshold conditions need s_c > 0 (s_c = {s_c})")));
        }
        let e = to_f64(self.energy);
        let m = to_f64(self.mass);
        let g = to_f64(self.grad_s_norm);
        let critical = (s_c - s).abs() < 1e-12;
        Ok(Thresholds {
            s_c,
            energy_q: e,
            grad_s_norm_q: g,
            energy_product: (!critical).then(|| e.powf(s_c) * m.powf(s - s_c)),
            gradient_product: (!critical).then(|| g * g * m.sqrt().powf(s - s_c)),
        })
    }

    /// Ground state as a complex field in physical space.
    pub fn profile(&self) -> Field<T> {
        self.q.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_soliton_limit() {
        // s -> 1, sigma = 1: Q ~ sqrt(2) sech(x)
        let grid = Grid::<f64>::new(&[512], &[60.0]).unwrap();
        let params = ModelParams::new(1, 0.999, 1.0).unwrap();
        let gs = petviashvili(&params, &gaussian_seed(&grid), &PetviashviliOptions::default()).unwrap();
        let oracle = Field::from_real_fn(&grid, |x| 2f64.sqrt() / x[0].cosh());
        let rel = gs.q.l2_distance(&oracle).unwrap() / mass(&oracle).sqrt();
        assert!(rel < 1e-2, "{rel}");
        assert!(gs.residual < 1e-8);
    }

    #[test]
    fn thresholds_self_comparison() {
        let grid = Grid::<f64>::cubic(3, 24, 16.0).unwrap();
        let params = ModelParams::new(3, 0.7, 0.6).unwrap();
        let gs = petviashvili(&params, &gaussian_seed(&grid), &PetviashviliOptions::default()).unwrap();
        let th = gs.thresholds(&params).unwrap();
        let same = th.evaluate(&gs.q, &params);
        assert!((same.gradient_lhs / same.gradient_rhs - 1.0).abs() < 1e-8);
        assert!(!same.gradient_condition && !same.energy_condition);
        let bigger = th.evaluate(&gs.q.scaled(1.2), &params);
        assert!(bigger.gradient_condition);
    }

    #[test]
    fn rejects_subcritical_thresholds() {
        let grid = Grid::<f64>::new(&[128], &[40.0]).unwrap();
        let params = ModelParams::new(1, 0.5, 0.5).unwrap();
        let gs = petviashvili(&params, &gaussian_seed(&grid), &PetviashviliOptions::default()).unwrap();
        assert!(gs.thresholds(&params).is_err());
    }
}
