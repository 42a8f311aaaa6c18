//! The radial cutoff `psi`, its rescaling `psi_R(r) = R^2 psi(r / R)`, and the
//! cylindrical weights `phi_R(x) = psi_R(|y|) + x_N^2 / 2`.
//!
//! `psi'(r) = r h(r)` with `h = 1` on `[0, 1]`, `h = 0` on `[10, inf)` and a
//! smooth-step blend in between, so every derivative is closed form in `h`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::scalar::{lit, to_f64, Real};

pub const INNER: f64 = 1.0;
pub const OUTER: f64 = 10.0;
const WIDTH: f64 = OUTER - INNER;

/// `1 / (1 + e^z)` without overflow.
fn logistic(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Smooth step `S(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` and its first
/// three derivatives, for `0 < t < 1`.
fn smooth_step(t: f64) -> [f64; 4] {
    let u = 1.0 - t;
    let q = 1.0 / t - 1.0 / u;
    let q1 = -1.0 / (t * t) - 1.0 / (u * u);
    let q2 = 2.0 / (t * t * t) - 2.0 / (u * u * u);
    let q3 = -6.0 / t.powi(4) - 6.0 / u.powi(4);
    let l = logistic(q);
    let e = (-q.abs()).exp();
    let a = e / ((1.0 + e) * (1.0 + e));
    let c = 1.0 - 2.0 * l;
    let l1 = -a;
    let l2 = a * c;
    let l3 = a * (2.0 * a - c * c);
    [l, l1 * q1, l2 * q1 * q1 + l1 * q2, l3 * q1 * q1 * q1 + 3.0 * l2 * q1 * q2 + l1 * q3]
}

/// `[h, h', h'', h''']` at `r >= 0`.
pub fn transition(r: f64) -> [f64; 4] {
    if r <= INNER {
        [1.0, 0.0, 0.0, 0.0]
    } else if r >= OUTER {
        [0.0; 4]
    } else {
        let s = smooth_step((r - INNER) / WIDTH);
        [1.0 - s[0], -s[1] / WIDTH, -s[2] / (WIDTH * WIDTH), -s[3] / (WIDTH * WIDTH * WIDTH)]
    }
}

#[derive(Clone, Debug)]
pub struct CutoffProfile {
    plateau: f64,
    rule: (Vec<f64>, Vec<f64>),
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::new()
    }
}

impl CutoffProfile {
    pub fn new() -> Self {
        let rule = gauss_legendre(20);
        let mut p = Self { plateau: 0.0, rule };
        p.plateau = p.blend_integral(OUTER);
        p
    }

    /// `psi(r) = 1/2 + int_1^r rho h(rho) d rho` on the blend.
    fn blend_integral(&self, r: f64) -> f64 {
        let panels = (16.0 * (r - INNER) / WIDTH).ceil().max(1.0) as usize;
        0.5 + composite_gauss_legendre(|x| x * transition(x)[0], INNER, r, panels, &self.rule)
    }

    /// `psi^{(order)}(r)` for `order <= 4`.
    pub fn eval_psi(&self, r: f64, order: usize) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff evaluated at negative radius {r}")));
        }
        let h = transition(r);
        Ok(match order {
            0 if r <= INNER => 0.5 * r * r,
            0 if r >= OUTER => self.plateau,
            0 => self.blend_integral(r),
            1 => r * h[0],
            2 => h[0] + r * h[1],
            3 => 2.0 * h[1] + r * h[2],
            4 => 3.0 * h[2] + r * h[3],
            _ => return Err(Error::InvalidArgument(format!("derivative order {order} > 4"))),
        })
    }

    /// Constant value of `psi` beyond the blend.
    pub fn plateau(&self) -> f64 {
        self.plateau
    }
}

/// Radial quantities of `psi_R` in `d = N - 1` transverse dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSample {
    /// `psi_R'(r) / r`, equal to `psi_R''(0)` at the axis.
    pub ratio: f64,
    /// `psi_R''(r)`.
    pub second: f64,
    /// `Delta_y psi_R`.
    pub laplacian: f64,
    /// `Delta_y^2 psi_R`.
    pub bilaplacian: f64,
    /// `1 - psi_R''`.
    pub tilde1: f64,
    /// `N - 1 - Delta_y psi_R`.
    pub tilde2: f64,
}

/// `phi_R(x) = psi_R(|y|) + x_N^2 / 2` on `R^N` (and `psi_R(|y|)` alone for
/// the `Sigma`-class variant).
#[derive(Clone, Debug)]
pub struct CylWeight {
    profile: Arc<CutoffProfile>,
    radius: f64,
    dim: usize,
}

impl CylWeight {
    pub fn new(profile: Arc<CutoffProfile>, radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {radius}")));
        }
        if dim < 2 {
            return Err(Error::InvalidArgument("cylindrical weights need N >= 2".into()));
        }
        Ok(Self { profile, radius, dim })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    /// `psi_R^{(order)}(r) = R^{2 - order} psi^{(order)}(r / R)`.
    pub fn psi_r(&self, r: f64, order: usize) -> Result<f64> {
        let v = self.profile.eval_psi(r / self.radius, order)?;
        Ok(v * self.radius.powi(2 - order as i32))
    }

    pub fn radial(&self, r: f64) -> RadialSample {
        let d = (self.dim - 1) as f64;
        let rho = r / self.radius;
        let [h, h1, h2, h3] = transition(rho);
        let second = h + rho * h1;
        let laplacian = d * h + rho * h1;
        let bilaplacian = if rho <= INNER {
            0.0
        } else {
            ((2.0 * d + 1.0) * h2 + rho * h3 + (d * d - 1.0) * h1 / rho) / (self.radius * self.radius)
        };
        RadialSample {
            ratio: h,
            second,
            laplacian,
            bilaplacian,
            tilde1: 1.0 - h - rho * h1,
            tilde2: d * (1.0 - h) - rho * h1,
        }
    }

    /// Per-point radial samples on `grid` (radius `|y|`).
    pub fn sample<T: Real>(&self, grid: &Grid<T>) -> Result<Vec<RadialSample>> {
        self.check_grid(grid)?;
        Ok(grid.y_radius().into_iter().map(|r| self.radial(to_f64(r))).collect())
    }

    fn check_grid<T: Real>(&self, grid: &Grid<T>) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "weight built for N = {} used on a {}-dimensional grid",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }

    /// `phi_R` sampled on the grid.
    pub fn phi<T: Real>(&self, grid: &Arc<Grid<T>>) -> Result<Field<T>> {
        self.check_grid(grid)?;
        let d = self.dim - 1;
        let mut bad = None;
        let f = Field::from_real_fn(grid, |x| {
            let r = x[..d].iter().map(|v| to_f64(*v).powi(2)).sum::<f64>().sqrt();
            let xn = to_f64(x[d]);
            match self.psi_r(r, 0) {
                Ok(p) => lit(p + 0.5 * xn * xn),
                Err(e) => {
                    bad = Some(e);
                    T::zero()
                }
            }
        });
        bad.map_or(Ok(f), Err)
    }

    pub fn hessian_phi<T: Real>(&self, grid: &Arc<Grid<T>>) -> Result<HessianTable<T>> {
        let samples = self.sample(grid)?;
        Ok(HessianTable { grid: grid.clone(), samples, include_xn: true })
    }

    /// Hessian of `psi_R(|y|)` alone (zero last row and column).
    pub fn hessian_psi<T: Real>(&self, grid: &Arc<Grid<T>>) -> Result<HessianTable<T>> {
        let samples = self.sample(grid)?;
        Ok(HessianTable { grid: grid.clone(), samples, include_xn: false })
    }

    /// `(psi~_{1,R}, psi~_{2,R})` sampled on the grid.
    pub fn tilde_weights<T: Real>(&self, grid: &Arc<Grid<T>>) -> Result<(Field<T>, Field<T>)> {
        let samples = self.sample(grid)?;
        let real = |f: fn(&RadialSample) -> f64| -> Vec<num_complex::Complex<T>> {
            samples.iter().map(|s| num_complex::Complex::new(lit(f(s)), T::zero())).collect()
        };
        Ok((Field::from_values(grid, real(|s| s.tilde1))?, Field::from_values(grid, real(|s| s.tilde2))?))
    }

    /// `sup |Delta^2 phi_R|` over the radial variable, sampled densely.
    pub fn bilaplacian_sup(&self) -> f64 {
        let n = 20_000;
        (0..=n)
            .map(|i| {
                let rho = INNER + WIDTH * i as f64 / n as f64;
                self.radial(rho * self.radius).bilaplacian.abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Symmetric `N x N` Hessian of `phi_R` (or `psi_R`), evaluated lazily.
///
/// `y`-block: `(delta_kl - y_k y_l / r^2) psi_R'/r + (y_k y_l / r^2) psi_R''`,
/// which equals `psi_R''(0)` times the identity on the axis.
#[derive(Clone, Debug)]
pub struct HessianTable<T: Real> {
    grid: Arc<Grid<T>>,
    samples: Vec<RadialSample>,
    include_xn: bool,
}

impl<T: Real> HessianTable<T> {
    pub fn samples(&self) -> &[RadialSample] {
        &self.samples
    }

    fn value(&self, k: usize, l: usize, x: &[T], flat: usize) -> f64 {
        let d = self.grid.dim() - 1;
        if k == d || l == d {
            return if k == l && self.include_xn { 1.0 } else { 0.0 };
        }
        let s = &self.samples[flat];
        let delta = if k == l { 1.0 } else { 0.0 };
        let r2: f64 = x[..d].iter().map(|v| to_f64(*v).powi(2)).sum();
        if r2 == 0.0 {
            return delta * s.second;
        }
        let proj = to_f64(x[k]) * to_f64(x[l]) / r2;
        (delta - proj) * s.ratio + proj * s.second
    }

    /// Entry `(k, l)` as a real field.
    pub fn entry(&self, k: usize, l: usize) -> Field<T> {
        let mut out = vec![num_complex::Complex::default(); self.grid.len()];
        self.grid.for_each_point(|flat, x| out[flat].re = lit(self.value(k, l, x, flat)));
        Field::from_values(&self.grid, out).expect("sized from grid")
    }

    /// Pointwise `sum_kl conj(a_k) H_kl a_l` (real for symmetric `H`), with
    /// `a` given as physical samples of each component.
    pub fn contract(&self, a: &[Vec<num_complex::Complex<T>>]) -> Vec<T> {
        let n = self.grid.dim();
        let mut out = vec![T::zero(); self.grid.len()];
        self.grid.for_each_point(|flat, x| {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let h = self.value(k, l, x, flat);
                    if h != 0.0 {
                        let z = a[k][flat].conj() * a[l][flat];
                        acc += h * to_f64(z.re);
                    }
                }
            }
            out[flat] = lit(acc);
        });
        out
    }
}
