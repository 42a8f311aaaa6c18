//! Numerical checks of the functional inequalities behind the tail estimates:
//! radial Sobolev, Gagliardo-Nirenberg, the radial Hessian formula, the
//! pointwise product identity for `(-d^2)^{s/2}` and the exterior tail chain.
//!
//! Inequalities are reported as [`RatioSample`]s. Their implicit constants are
//! never asserted, only their scaling and finiteness.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::quadrature::adaptive_gk;
use crate::scalar::{lit, to_f64, Real};
use crate::special::{hurwitz_zeta, one_minus_cos_moment, zeta};
use crate::spectral;

/// Relative tolerance of the single-mode self-test of the kernel quadrature.
pub const KERNEL_SELF_TEST_TOL: f64 = 1e-5;

/// Symmetry tolerance for fields fed to [`chain_ratios`].
pub const CHAIN_SYMMETRY_TOL: f64 = 1e-8;

/// One evaluation `lhs <= C rhs`, tagged with the family it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSample {
    pub family: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioSample {
    pub fn new(lhs: f64, rhs: f64) -> Result<Self> {
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs > 0.0 {
            lhs / rhs
        } else {
            return Err(Error::InvalidArgument(format!("ratio with lhs {lhs:e} and rhs {rhs:e}")));
        };
        if !ratio.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite ratio {lhs:e}/{rhs:e}")));
        }
        Ok(Self { family: String::new(), lhs, rhs, ratio })
    }

    pub fn labelled(mut self, family: impl Into<String>) -> Self {
        self.family = family.into();
        self
    }
}

/// `|y|^{(N-2)/2} |f(y)|` against `||(-Delta)^{s/2} f||^{1/(2s)} ||f||^{1-1/(2s)}`
/// for a radial `f` on an `(N-1)`-dimensional grid, probed at `(y_probe, 0, ..)`.
pub fn radial_sobolev_ratio<T: Real>(f: &Field<T>, y_probe: T, s: T) -> Result<RatioSample> {
    let d = f.grid().dim();
    if d < 2 {
        return Err(Error::InvalidArgument("radial Sobolev needs at least two y axes".into()));
    }
    if !(y_probe > T::zero()) {
        return Err(Error::InvalidArgument("probe radius must be positive".into()));
    }
    let mut x = vec![T::zero(); d];
    x[0] = y_probe;
    let value = to_f64(f.eval_at(&x)?.norm());
    let r = to_f64(y_probe);
    let lhs = r.powf((d as f64 - 1.0) / 2.0) * value;
    let s = to_f64(s);
    let g = to_f64(spectral::sobolev_seminorm(f, lit(s)));
    let m = to_f64(spectral::mass(f));
    let rhs = g.powf(1.0 / (2.0 * s)) * m.powf((1.0 - 1.0 / (2.0 * s)) / 2.0);
    RatioSample::new(lhs, rhs)
}

/// `||f||_p` against `||(-Delta)^{s/2} f||^alpha ||f||^{1-alpha}`, `alpha = (p-2)/(2ps)`,
/// on a one-dimensional grid.
pub fn gn_ratio<T: Real>(f: &Field<T>, p: T, s: T) -> Result<RatioSample> {
    if f.grid().dim() != 1 {
        return Err(Error::InvalidArgument("Gagliardo-Nirenberg ratio is one-dimensional".into()));
    }
    let (p, s) = (to_f64(p), to_f64(s));
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("exponent p = {p} must exceed 2")));
    }
    let alpha = (p - 2.0) / (2.0 * p * s);
    if alpha > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha = (p-2)/(2ps) = {alpha} exceeds 1; p must satisfy p <= 2/(1-2s) for s < 1/2"
        )));
    }
    let lhs = to_f64(spectral::lp_power(f, lit(p))).powf(1.0 / p);
    let g = to_f64(spectral::sobolev_seminorm(f, lit(s)));
    let m = to_f64(spectral::mass(f));
    let rhs = g.powf(alpha) * m.powf((1.0 - alpha) / 2.0);
    RatioSample::new(lhs, rhs)
}

/// `C_{1,s} = (int_R (1 - cos xi) / |xi|^{1+s} dxi)^{-1}` by adaptive quadrature,
/// one panel per period plus an integrated-by-parts tail.
pub fn kernel_constant(s: f64) -> f64 {
    let period = 2.0 * std::f64::consts::PI;
    let panels = 400;
    let f = |x: f64| if x == 0.0 { 0.0 } else { 2.0 * (x / 2.0).sin().powi(2) * x.powf(-1.0 - s) };
    let mut half = 0.0;
    for k in 0..panels {
        half += adaptive_gk(f, k as f64 * period, (k + 1) as f64 * period, 1e-14);
    }
    // int_A^inf (1 - cos x) x^{-1-s} with sin A = 0, cos A = 1
    let a = panels as f64 * period;
    half += a.powf(-s) / s - (1.0 + s) * a.powf(-2.0 - s);
    1.0 / (2.0 * half)
}

/// Result of [`fid_identity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FidReport {
    /// `sup |(-d^2)^{s/2}|u|^2 - 2|u|(-d^2)^{s/2}|u| + I_s(|u|,|u|)|`.
    pub residual: f64,
    /// `sup |(-d^2)^{s/2}|u|^2|`.
    pub scale: f64,
    pub kernel_constant: f64,
    /// Relative error of the kernel quadrature on a single Fourier mode.
    pub self_test_error: f64,
}

/// Checks `(-d^2)^{s/2} |u|^2 = 2|u| (-d^2)^{s/2} |u| - I_s(|u|,|u|)` on a 1D grid.
///
/// The fractional powers are spectral. `I_s` is a direct sum against the
/// periodized kernel `C_{1,s} sum_n |z + nL|^{-1-s}` (Hurwitz zeta), with the
/// principal-value singularity at `z = 0` removed by generalized
/// Euler-Maclaurin corrections through order `h^{4-s}`.
pub fn fid_identity_check<T: Real>(u: &Field<T>, s: T) -> Result<FidReport> {
    let grid = u.grid().clone();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("pointwise identity check is one-dimensional".into()));
    }
    let s64 = to_f64(s);
    if !(s64 > 0.0 && s64 < 2.0) {
        return Err(Error::InvalidArgument(format!("order s = {s64} outside (0, 2)")));
    }
    u.check_finite()?;
    let c = kernel_constant(s64);
    let n = grid.len();
    let length = to_f64(grid.lengths()[0]);
    let kernel = periodic_kernel(n, length, s64, c);

    // kernel self-test on a low Fourier mode
    let k1 = 2.0 * std::f64::consts::PI * 3.0 / length;
    let mode: Vec<Complex<f64>> = (0..n).map(|j| Complex::from_polar(1.0, k1 * j as f64 * length / n as f64)).collect();
    let g64 = Grid::<f64>::new(&[n], &[length])?;
    let mode_i = kernel_integral(&g64, &mode, &kernel, s64, c)?;
    let target = 2.0 * k1.powf(s64);
    let self_test_error = mode_i.iter().fold(0.0f64, |m, v| m.max((v - target).abs())) / target;
    if self_test_error > KERNEL_SELF_TEST_TOL {
        return Err(Error::QuadratureGate(format!(
            "kernel self-test error {self_test_error:e} exceeds {KERNEL_SELF_TEST_TOL:e}"
        )));
    }

    let modulus = u.modulus();
    let v: Vec<Complex<f64>> = modulus.physical().iter().map(|z| Complex::new(to_f64(z.re), 0.0)).collect();
    let v_field = Field::from_values(&g64, v.clone())?;
    let sq = Field::from_values(&g64, v.iter().map(|z| z * z).collect())?;
    let half = s64 / 2.0;
    let a = spectral::fractional_power(&sq, half)?;
    let dv = spectral::fractional_power(&v_field, half)?;
    let i_s = kernel_integral(&g64, &v, &kernel, s64, c)?;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        let lhs = a.values()[j].re;
        let rhs = 2.0 * v[j].re * dv.values()[j].re - i_s[j];
        residual = residual.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs());
    }
    Ok(FidReport { residual, scale, kernel_constant: c, self_test_error })
}

/// `C L^{-1-s} [zeta(1+s, z/L) + zeta(1+s, 1 - z/L)]` at `z = j h`, `j = 1..n-1`.
fn periodic_kernel(n: usize, length: f64, s: f64, c: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (j, k) in out.iter_mut().enumerate().skip(1) {
        let t = j as f64 / n as f64;
        *k = c * length.powf(-1.0 - s) * (hurwitz_zeta(1.0 + s, t) + hurwitz_zeta(1.0 + s, 1.0 - t));
    }
    out
}

/// `C int |v(x) - v(x + z)|^2 / |z|^{1+s} dz` at every grid point.
fn kernel_integral(grid: &Arc<Grid<f64>>, v: &[Complex<f64>], kernel: &[f64], s: f64, c: f64) -> Result<Vec<f64>> {
    let n = v.len();
    let h = grid.spacing()[0];
    let field = Field::from_values(grid, v.to_vec())?;
    let d1 = spectral::partial(&field, 0)?;
    let d2 = spectral::partial(&d1, 0)?;
    let d3 = spectral::partial(&d2, 0)?;
    let z1 = zeta(s - 1.0);
    let z3 = zeta(s - 3.0);
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &k) in kernel.iter().enumerate().skip(1) {
            acc += (v[i] - v[(i + j) % n]).norm_sqr() * k;
        }
        let (a1, a2, a3) = (d1.values()[i], d2.values()[i], d3.values()[i]);
        let g0 = a1.norm_sqr();
        let g2 = a2.norm_sqr() / 4.0 + (a1.conj() * a3).re / 3.0;
        *slot = h * acc - 2.0 * c * (z1 * g0 * h.powf(2.0 - s) + z3 * g2 * h.powf(4.0 - s));
    }
    Ok(out)
}

/// Closed-form value of [`kernel_constant`], used as its oracle.
pub fn kernel_constant_closed_form(s: f64) -> f64 {
    1.0 / one_minus_cos_moment(s)
}

/// Ratios of the exterior tail chain for one field and one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRecord {
    pub radius: f64,
    /// `int max_{|y|>=R} |u|^2 dx_N` against
    /// `R^{-(N-2)} int ||(-Delta_y)^{s/2} u||^{1/s} ||u||^{2-1/s} dx_N`.
    pub exterior_sup: RatioSample,
    /// Same lhs against `R^{-(N-2)} (int ||(-Delta_y)^{s/2}u||^2)^{1/(2s)} M^{(2s-1)/(2s)}`.
    pub exterior_sup_holder: RatioSample,
    /// `int ||u||_{L^2_y}^{2/(1-sigma)} dx_N` against
    /// `(int ||(-d_N^2)^{s/2}|u| ||^2_{L^2_{x_N}} dy)^{sigma/(2s(1-sigma))}`.
    pub slab: RatioSample,
    /// `int_{|y|>=R} |u|^{2 sigma+2}` against `R^{-sigma(N-2)} (1 + ||(-Delta)^{s/2}u||^2)`.
    pub tail: RatioSample,
    /// Tail against `(exterior_sup.lhs)^sigma (slab.lhs)^{1-sigma}`; at most one.
    pub holder_split: RatioSample,
}

/// Evaluates each link of the exterior tail chain at radius `radius`.
pub fn chain_ratios<T: Real>(u: &Field<T>, params: &ModelParams<T>, radius: T) -> Result<ChainRecord> {
    let grid = u.grid().clone();
    let dim = grid.dim();
    if dim != params.dim() || dim < 3 {
        return Err(Error::InvalidArgument(format!(
            "tail chain needs N >= 3 matching the parameters (grid {dim}, params {})",
            params.dim()
        )));
    }
    if !params.sigma_leq_s() {
        return Err(Error::Params("tail chain requires 0 < sigma <= s".into()));
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let sup = to_f64(u.sup_norm());
    let deviation = to_f64(u.y_symmetry_deviation());
    if deviation > CHAIN_SYMMETRY_TOL * sup.max(1.0) {
        return Err(Error::Symmetry { deviation, tolerance: CHAIN_SYMMETRY_TOL });
    }
    let s = to_f64(params.s());
    let sigma = to_f64(params.sigma());
    let r = to_f64(radius);
    let nd = dim as f64;

    let nn = grid.shape()[dim - 1];
    let hn = to_f64(grid.spacing()[dim - 1]);
    let hy = to_f64(grid.cell_volume()) / hn;
    let radius_y: Vec<f64> = grid.y_radius().into_iter().map(to_f64).collect();
    let vals = u.physical();
    let wy = spectral::partial_fractional_y(u, params.s() / lit(2.0))?;
    let wy_vals = wy.physical();

    let mut ext_max = vec![0.0f64; nn];
    let mut slice_mass = vec![0.0f64; nn];
    let mut slice_grad = vec![0.0f64; nn];
    let mut tail = 0.0;
    let p = 2.0 * sigma + 2.0;
    for flat in 0..grid.len() {
        let j = flat % nn;
        let a2 = to_f64(vals[flat].norm_sqr());
        slice_mass[j] += a2 * hy;
        slice_grad[j] += to_f64(wy_vals[flat].norm_sqr()) * hy;
        if radius_y[flat] >= r {
            ext_max[j] = ext_max[j].max(a2);
            tail += a2.powf(p / 2.0);
        }
    }
    tail *= hy * hn;

    let sup_lhs: f64 = ext_max.iter().sum::<f64>() * hn;
    let mut line1 = 0.0;
    for j in 0..nn {
        if slice_mass[j] > 0.0 {
            line1 += slice_grad[j].powf(1.0 / (2.0 * s)) * slice_mass[j].powf(1.0 - 1.0 / (2.0 * s));
        }
    }
    let geo = r.powf(-(nd - 2.0));
    let exterior_sup = RatioSample::new(sup_lhs, geo * line1 * hn)?.labelled("exterior sup");
    let grad_y_total: f64 = slice_grad.iter().sum::<f64>() * hn;
    let mass: f64 = slice_mass.iter().sum::<f64>() * hn;
    let holder_rhs = geo * grad_y_total.powf(1.0 / (2.0 * s)) * mass.powf((2.0 * s - 1.0) / (2.0 * s));
    let exterior_sup_holder = RatioSample::new(sup_lhs, holder_rhs)?.labelled("exterior sup, Holder");

    let slab_lhs: f64 = slice_mass.iter().map(|m| m.powf(1.0 / (1.0 - sigma))).sum::<f64>() * hn;
    let dn = spectral::partial_fractional_xn(&u.modulus(), params.s() / lit(2.0))?;
    let dn_sq = to_f64(spectral::mass(&dn));
    let slab_rhs = dn_sq.powf(sigma / (2.0 * s * (1.0 - sigma)));
    let slab = RatioSample::new(slab_lhs, slab_rhs)?.labelled("slab");

    let g2 = to_f64(spectral::sobolev_seminorm_sq(u, params.s()));
    let tail_rhs = r.powf(-sigma * (nd - 2.0)) * (1.0 + g2);
    let tail_sample = RatioSample::new(tail, tail_rhs)?.labelled("tail");
    let split_rhs = sup_lhs.powf(sigma) * slab_lhs.powf(1.0 - sigma);
    let holder_split = RatioSample::new(tail, split_rhs)?.labelled("tail Holder split");

    Ok(ChainRecord { radius: r, exterior_sup, exterior_sup_holder, slab, tail: tail_sample, holder_split })
}

/// `tail(2R) / tail(R)` against `2^{-sigma(N-2)}`: the growth factor of the
/// normalized tail ratio across one doubling of `R`.
pub fn tail_doubling_factor(at_r: &ChainRecord, at_2r: &ChainRecord) -> f64 {
    if at_r.tail.ratio == 0.0 {
        return 0.0;
    }
    at_2r.tail.ratio / at_r.tail.ratio
}

/// Result of [`hessian_formula_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct HessianCheck {
    /// Largest entry of `|formula - spectral|` over points with `r > h`.
    pub residual: f64,
    /// Largest spectral second partial over the same points.
    pub scale: f64,
}

/// Compares `d_k d_l f = (delta_kl - x_k x_l / r^2) f'/r + x_k x_l / r^2 f''`
/// with spectral second partials for the radial function `profile(r) = [f, f', f'']`
/// sampled on all axes of `grid`.
pub fn hessian_formula_check<T: Real>(grid: &Arc<Grid<T>>, profile: impl Fn(f64) -> [f64; 3]) -> Result<HessianCheck> {
    let dim = grid.dim();
    let mut radius = vec![0.0f64; grid.len()];
    grid.for_each_point(|flat, x| {
        radius[flat] = x.iter().map(|&v| to_f64(v * v)).sum::<f64>().sqrt();
    });
    let samples: Vec<[f64; 3]> = radius.iter().map(|&r| profile(r)).collect();
    let f = Field::from_values(grid, samples.iter().map(|p| Complex::new(lit(p[0]), T::zero())).collect())?;
    let h = grid.spacing().iter().fold(0.0f64, |m, &v| m.max(to_f64(v)));
    let coords: Vec<Vec<f64>> = (0..dim).map(|a| grid.coords(a).iter().map(|&v| to_f64(v)).collect()).collect();
    let spec = f.to_frequency();
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..dim {
        for b in a..dim {
            let d2 = spectral::second_partial(&spec, a, b)?;
            let vals = d2.values();
            grid.for_each_index(|flat, idx| {
                let r = radius[flat];
                if r <= h {
                    return;
                }
                let [_, f1, f2] = samples[flat];
                let w = coords[a][idx[a]] * coords[b][idx[b]] / (r * r);
                let delta = if a == b { 1.0 } else { 0.0 };
                let formula = (delta - w) * f1 / r + w * f2;
                let spectral_value = to_f64(vals[flat].re);
                residual = residual.max((formula - spectral_value).abs());
                scale = scale.max(spectral_value.abs());
            });
        }
    }
    Ok(HessianCheck { residual, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_constant_matches_closed_form() {
        for s in [0.3, 0.5, 0.6, 0.9] {
            let q = kernel_constant(s);
            let exact = kernel_constant_closed_form(s);
            assert!((q - exact).abs() < 1e-9 * exact, "s={s}: {q} vs {exact}");
        }
    }

    #[test]
    fn ratio_of_zero_is_zero() {
        assert_eq!(RatioSample::new(0.0, 0.0).unwrap().ratio, 0.0);
        assert!(RatioSample::new(1.0, 0.0).is_err());
    }

    #[test]
    fn gn_rejects_large_exponent() {
        let g = Grid::<f64>::new(&[32], &[10.0]).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x[0] * x[0]).exp());
        assert!(gn_ratio(&f, 2.0, 0.4).is_err());
        assert!(gn_ratio(&f, 12.0, 0.4).is_err());
        assert!(gn_ratio(&f, 4.0, 0.4).is_ok());
    }
}
