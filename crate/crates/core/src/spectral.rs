//! Fourier multipliers and the conserved functionals.
//!
//! All integrals are Riemann sums `sum f * prod h_j` on the uniform grid;
//! frequency-space sums carry the matching `prod h_j / prod n_j` factor.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::params::ModelParams;
use crate::scalar::{count, lit, Real};

fn positive_order<T: Real>(p: T) -> Result<()> {
    if p > T::zero() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fractional exponent must be positive, got {p}")))
    }
}

/// Multiplies the spectrum by `symbol(flat, multi_index)`; result in physical space.
pub fn apply_symbol<T: Real>(f: &Field<T>, mut symbol: impl FnMut(usize, &[usize]) -> Complex<T>) -> Result<Field<T>> {
    f.check_finite()?;
    let mut spec = f.to_frequency();
    let grid = spec.grid().clone();
    let vals = spec.values_mut();
    grid.for_each_index(|flat, idx| vals[flat] *= symbol(flat, idx));
    Ok(spec.into_physical())
}

/// `(-Delta)^p f`, i.e. the multiplier `|k|^{2p}`. The zero mode is annihilated.
pub fn fractional_power<T: Real>(f: &Field<T>, p: T) -> Result<Field<T>> {
    positive_order(p)?;
    let ksq = f.grid().k_squared();
    apply_symbol(f, |flat, _| Complex::new(ksq[flat].powf(p), T::zero()))
}

/// `(-d^2/dx_N^2)^p f`: multiplier `|k_N|^{2p}` acting along the last axis only.
pub fn partial_fractional_xn<T: Real>(f: &Field<T>, p: T) -> Result<Field<T>> {
    positive_order(p)?;
    let grid = f.grid().clone();
    let last = grid.dim() - 1;
    let kn = grid.wavenumbers(last);
    apply_symbol(f, |_, idx| Complex::new(kn[idx[last]].abs().powf(p + p), T::zero()))
}

/// `(-Delta_y)^p f`: multiplier `|k_y|^{2p}` over the first `N - 1` axes.
pub fn partial_fractional_y<T: Real>(f: &Field<T>, p: T) -> Result<Field<T>> {
    positive_order(p)?;
    let grid = f.grid().clone();
    let ny = grid.dim() - 1;
    apply_symbol(f, |_, idx| {
        let ky2 = (0..ny).fold(T::zero(), |acc, a| {
            let k = grid.wavenumbers(a)[idx[a]];
            acc + k * k
        });
        Complex::new(ky2.powf(p), T::zero())
    })
}

/// `d f / d x_axis` via the multiplier `i k_axis`, Nyquist mode zeroed.
pub fn partial<T: Real>(f: &Field<T>, axis: usize) -> Result<Field<T>> {
    let grid = f.grid().clone();
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let k = grid.wavenumbers(axis);
    apply_symbol(f, |_, idx| {
        if grid.is_nyquist(axis, idx[axis]) {
            Complex::default()
        } else {
            Complex::new(T::zero(), k[idx[axis]])
        }
    })
}

/// Spectral gradient, one component per axis.
pub fn gradient<T: Real>(f: &Field<T>) -> Result<Vec<Field<T>>> {
    f.check_finite()?;
    let spec = f.to_frequency();
    (0..f.grid().dim()).map(|a| partial(&spec, a)).collect()
}

/// `d^2 f / dx_a dx_b` via `-k_a k_b`; mixed derivatives drop Nyquist modes.
pub fn second_partial<T: Real>(f: &Field<T>, a: usize, b: usize) -> Result<Field<T>> {
    let grid = f.grid().clone();
    if a >= grid.dim() || b >= grid.dim() {
        return Err(Error::InvalidArgument("axis out of range".into()));
    }
    apply_symbol(f, |_, idx| {
        if a != b && (grid.is_nyquist(a, idx[a]) || grid.is_nyquist(b, idx[b])) {
            return Complex::default();
        }
        let ka = grid.wavenumbers(a)[idx[a]];
        let kb = grid.wavenumbers(b)[idx[b]];
        Complex::new(-ka * kb, T::zero())
    })
}

/// `M[f] = int |f|^2`, evaluated in physical space.
pub fn mass<T: Real>(f: &Field<T>) -> T {
    let s = f.physical().iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
    s * f.grid().cell_volume()
}

/// `M[f]` from the Fourier coefficients (Plancherel).
pub fn mass_spectral<T: Real>(f: &Field<T>) -> T {
    let s = f.spectrum().iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
    s * spectral_weight(f)
}

/// `int |f|^p`.
pub fn lp_power<T: Real>(f: &Field<T>, p: T) -> T {
    let half = p / lit(2.0);
    let s = f.physical().iter().fold(T::zero(), |acc, v| acc + v.norm_sqr().powf(half));
    s * f.grid().cell_volume()
}

/// Factor turning `sum |f_hat|^2` into `int |f|^2`.
pub fn spectral_weight<T: Real>(f: &Field<T>) -> T {
    let g = f.grid();
    g.cell_volume() / count::<T>(g.len())
}

/// `||(-Delta)^{s/2} f||_2^2` via Plancherel.
pub fn sobolev_seminorm_sq<T: Real>(f: &Field<T>, s: T) -> T {
    let ksq = f.grid().k_squared();
    let spec = f.spectrum();
    let sum = spec
        .iter()
        .zip(ksq)
        .fold(T::zero(), |acc, (v, &k2)| if k2 > T::zero() { acc + k2.powf(s) * v.norm_sqr() } else { acc });
    sum * spectral_weight(f)
}

/// `||(-Delta)^{s/2} f||_2`.
pub fn sobolev_seminorm<T: Real>(f: &Field<T>, s: T) -> T {
    sobolev_seminorm_sq(f, s).sqrt()
}

/// `||(-Delta)^{s/2} f||_2` computed by applying the operator and taking the
/// physical-space mass; used as a cross-check of [`sobolev_seminorm`].
pub fn sobolev_seminorm_physical<T: Real>(f: &Field<T>, s: T) -> Result<T> {
    let g = fractional_power(f, s / lit(2.0))?;
    Ok(mass(&g).sqrt())
}

/// `E[f] = 1/2 ||(-Delta)^{s/2} f||^2 - (2 sigma + 2)^{-1} int |f|^{2 sigma + 2}`.
pub fn energy<T: Real>(f: &Field<T>, params: &ModelParams<T>) -> T {
    let kinetic = sobolev_seminorm_sq(f, params.s());
    let q = params.potential_exponent();
    kinetic / lit(2.0) - lp_power(f, q) / q
}

/// Fraction of the mass in the outer shell `|x_j| >= (1 - shell) L_j / 2` for any axis.
pub fn boundary_mass_fraction<T: Real>(f: &Field<T>, shell: T) -> T {
    let grid = f.grid().clone();
    let vals = f.physical();
    let half = lit::<T>(0.5);
    let limits: Vec<T> = grid.lengths().iter().map(|&l| (T::one() - shell) * l * half).collect();
    let mut outer = T::zero();
    let mut total = T::zero();
    grid.for_each_point(|flat, x| {
        let w = vals[flat].norm_sqr();
        total += w;
        if x.iter().zip(&limits).any(|(&xi, &lim)| xi.abs() >= lim) {
            outer += w;
        }
    });
    if total > T::zero() {
        outer / total
    } else {
        T::zero()
    }
}

/// Pointwise product of two fields in physical space.
pub fn pointwise<T: Real>(
    a: &Field<T>,
    b: &Field<T>,
    op: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
) -> Result<Field<T>> {
    a.ensure_same_grid(b)?;
    let va = a.physical();
    let vb = b.physical();
    let vals = va.iter().zip(vb.iter()).map(|(&x, &y)| op(x, y)).collect();
    Field::with_representation(a.grid(), vals, Representation::Physical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus(dim: usize, n: usize) -> Arc<Grid<f64>> {
        Grid::cubic(dim, n, 2.0 * PI).unwrap()
    }

    fn mode(g: &Arc<Grid<f64>>, k: &[f64], amp: f64) -> Field<f64> {
        Field::from_fn(g, |x| {
            let ph: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
            Complex::from_polar(amp, ph)
        })
    }

    fn max_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
        a.physical().iter().zip(b.physical().iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fractional_power_examples() {
        let g = torus(2, 16);
        let unit = mode(&g, &[1.0, 0.0], 1.0);
        for p in [0.1, 0.35, 0.5, 2.0] {
            assert!(max_diff(&fractional_power(&unit, p).unwrap(), &unit) < 1e-12);
        }
        let two = mode(&g, &[2.0, 0.0], 1.0);
        assert!(max_diff(&fractional_power(&two, 0.5).unwrap(), &two.scaled(2.0)) < 1e-12);
        let c = Field::from_real_fn(&g, |_| 3.5);
        assert!(fractional_power(&c, 0.3).unwrap().sup_norm() < 1e-14);
        assert!(fractional_power(&c, 0.0).is_err());
    }

    #[test]
    fn partial_fractional_examples() {
        let g = torus(3, 8);
        let s = 0.7;
        let en = mode(&g, &[0.0, 0.0, 1.0], 1.0);
        assert!(max_diff(&partial_fractional_xn(&en, s / 2.0).unwrap(), &en) < 1e-12);
        let e1 = mode(&g, &[1.0, 0.0, 0.0], 1.0);
        assert!(partial_fractional_xn(&e1, 0.4).unwrap().sup_norm() < 1e-14);
        let e3 = mode(&g, &[0.0, 0.0, 3.0], 1.0);
        assert!(max_diff(&partial_fractional_xn(&e3, 0.5).unwrap(), &e3.scaled(3.0)) < 1e-12);
        // y-only multiplier: |k_y|^{2p} with k_y = (1, 1) -> 2^p
        let ey = mode(&g, &[1.0, 1.0, 2.0], 1.0);
        let out = partial_fractional_y(&ey, 0.5).unwrap();
        assert!(max_diff(&out, &ey.scaled(2f64.sqrt())) < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = torus(3, 8);
        let e1 = mode(&g, &[1.0, 0.0, 0.0], 1.0);
        let grad = gradient(&e1).unwrap();
        let i_e1 = Field::from_fn(&g, |x| Complex::new(0.0, 1.0) * Complex::from_polar(1.0, x[0]));
        assert!(max_diff(&grad[0], &i_e1) < 1e-12);
        assert!(grad[1].sup_norm() < 1e-13 && grad[2].sup_norm() < 1e-13);

        let c = Field::from_real_fn(&g, |_| 1.0);
        assert!(gradient(&c).unwrap().iter().all(|d| d.sup_norm() < 1e-14));

        let f = mode(&g, &[2.0, 0.0, 1.0], 1.0);
        let grad = gradient(&f).unwrap();
        let i = Complex::new(0.0, 1.0);
        let expect0 = Field::from_fn(&g, |x| i * 2.0 * Complex::from_polar(1.0, 2.0 * x[0] + x[2]));
        let expect2 = Field::from_fn(&g, |x| i * Complex::from_polar(1.0, 2.0 * x[0] + x[2]));
        assert!(max_diff(&grad[0], &expect0) < 1e-12);
        assert!(grad[1].sup_norm() < 1e-13);
        assert!(max_diff(&grad[2], &expect2) < 1e-12);
    }

    #[test]
    fn mass_examples() {
        let g = Grid::<f64>::new(&[8, 4], &[2.0, 3.0]).unwrap();
        assert_eq!(mass(&Field::zeros(&g)), 0.0);
        assert!((mass(&Field::from_real_fn(&g, |_| 1.0)) - 6.0).abs() < 1e-14);

        let g3 = Grid::<f64>::cubic(3, 32, 16.0).unwrap();
        let gauss = Field::from_real_fn(&g3, |x| (-(x.iter().map(|v| v * v).sum::<f64>()) / 2.0).exp());
        assert!((mass(&gauss) - PI.powf(1.5)).abs() < 1e-8);
    }

    #[test]
    fn energy_of_single_mode() {
        let g = torus(2, 16);
        let (a, s, sigma) = (1.3, 0.7, 0.6);
        let params = ModelParams::new(2, s, sigma).unwrap();
        let f = mode(&g, &[1.0, 0.0], a);
        let v = g.volume();
        let q: f64 = 2.0 * sigma + 2.0;
        let expect = 0.5 * a * a * v - a.powf(q) * v / q;
        assert!((energy(&f, &params) - expect).abs() < 1e-11 * expect.abs());
        assert_eq!(energy(&Field::zeros(&g), &params), 0.0);
    }

    #[test]
    fn seminorm_examples() {
        let g = torus(3, 8);
        assert!(sobolev_seminorm(&Field::from_real_fn(&g, |_| 2.0), 0.6) < 1e-14);
        let f = mode(&g, &[1.0, 0.0, 0.0], 1.0);
        assert!((sobolev_seminorm(&f, 0.6) - g.volume().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_fraction_of_localized_and_flat_fields() {
        let g = Grid::<f64>::cubic(2, 32, 20.0).unwrap();
        let gauss = Field::from_real_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        assert!(boundary_mass_fraction(&gauss, 0.1) < 1e-30);
        let flat = Field::from_real_fn(&g, |_| 1.0);
        let frac = boundary_mass_fraction(&flat, 0.1);
        // |x_j| >= 9 holds for 3 of the 32 coordinates per axis
        let expect = 1.0 - (29.0f64 / 32.0).powi(2);
        assert!((frac - expect).abs() < 1e-12, "{frac}");
    }
}
