//! Complex fields sampled on a periodic grid.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Grid, YSymmetry};
use crate::scalar::{count, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Frequency,
}

#[derive(Clone, Debug)]
pub struct Field<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Complex<T>>,
    repr: Representation,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self { grid: grid.clone(), values: vec![Complex::default(); grid.len()], repr: Representation::Physical }
    }

    /// Wraps physical-space samples.
    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        Self::with_representation(grid, values, Representation::Physical)
    }

    pub fn with_representation(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>, repr: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} samples for a grid of {} points", values.len(), grid.len())));
        }
        Ok(Self { grid: grid.clone(), values, repr })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl FnMut(&[T]) -> Complex<T>) -> Self {
        Self { grid: grid.clone(), values: grid.sample(f), repr: Representation::Physical }
    }

    /// Samples a real-valued `f` at the grid points.
    pub fn from_real_fn(grid: &Arc<Grid<T>>, mut f: impl FnMut(&[T]) -> T) -> Self {
        Self::from_fn(grid, |x| Complex::new(f(x), T::zero()))
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Raw samples in the current representation.
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn into_frequency(mut self) -> Self {
        if self.repr == Representation::Physical {
            self.grid.forward(&mut self.values);
            self.repr = Representation::Frequency;
        }
        self
    }

    pub fn into_physical(mut self) -> Self {
        if self.repr == Representation::Frequency {
            self.grid.inverse(&mut self.values);
            self.repr = Representation::Physical;
        }
        self
    }

    pub fn to_frequency(&self) -> Self {
        self.clone().into_frequency()
    }

    pub fn to_physical(&self) -> Self {
        self.clone().into_physical()
    }

    /// Physical-space samples, transforming a copy if needed.
    pub fn physical(&self) -> std::borrow::Cow<'_, [Complex<T>]> {
        match self.repr {
            Representation::Physical => std::borrow::Cow::Borrowed(&self.values),
            Representation::Frequency => std::borrow::Cow::Owned(self.to_physical().values),
        }
    }

    /// Unnormalized Fourier coefficients, transforming a copy if needed.
    pub fn spectrum(&self) -> std::borrow::Cow<'_, [Complex<T>]> {
        match self.repr {
            Representation::Frequency => std::borrow::Cow::Borrowed(&self.values),
            Representation::Physical => std::borrow::Cow::Owned(self.to_frequency().values),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        let bad = self.values.iter().filter(|v| !(v.re.is_finite() && v.im.is_finite())).count();
        if bad == 0 {
            Ok(())
        } else {
            Err(Error::NonFinite { count: bad, total: self.values.len() })
        }
    }

    pub fn ensure_same_grid(&self, other: &Field<T>) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    /// `a * self` (representation preserved).
    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Pointwise modulus as a real field in physical space.
    pub fn modulus(&self) -> Self {
        let values = self.physical().iter().map(|v| Complex::new(v.norm(), T::zero())).collect();
        Self { grid: self.grid.clone(), values, repr: Representation::Physical }
    }

    /// Maximum modulus over the grid.
    pub fn sup_norm(&self) -> T {
        self.physical().iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Discrete `L^2` distance `(sum |a - b|^2 prod h_j)^{1/2}`.
    pub fn l2_distance(&self, other: &Field<T>) -> Result<T> {
        self.ensure_same_grid(other)?;
        let a = self.physical();
        let b = other.physical();
        let s = a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc + (*x - *y).norm_sqr());
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// Largest deviation `|u(g x) - u(x)|` over the generators of the grid's
    /// `y`-plane symmetry group.
    pub fn y_symmetry_deviation(&self) -> T {
        let vals = self.physical();
        let gens = self.grid.y_symmetry_generators();
        let mut worst = T::zero();
        self.grid.for_each_index(|flat, idx| {
            for &g in &gens {
                let img = self.grid.symmetry_image(g, idx);
                worst = worst.max((vals[img] - vals[flat]).norm());
            }
        });
        worst
    }

    /// Projection onto the `y`-symmetric subspace by group averaging over
    /// sign flips and (when the axes allow it) permutations of `y` axes.
    pub fn symmetrize_y(&self) -> Self {
        let grid = &self.grid;
        let mut vals = self.physical().into_owned();
        let ny = grid.dim().saturating_sub(1);
        let half = T::one() / (T::one() + T::one());
        for a in 0..ny {
            let mut next = vals.clone();
            grid.for_each_index(|flat, idx| {
                let img = grid.symmetry_image(YSymmetry::Flip(a), idx);
                next[flat] = (vals[flat] + vals[img]) * half;
            });
            vals = next;
        }
        let swappable = grid.y_symmetry_generators().iter().filter(|g| matches!(g, YSymmetry::Swap(..))).count();
        if ny >= 2 && swappable == ny - 1 {
            let perms = permutations(ny);
            let norm = T::one() / count::<T>(perms.len());
            let mut next = vec![Complex::default(); vals.len()];
            let strides = grid.strides().to_vec();
            grid.for_each_index(|flat, idx| {
                let mut acc = Complex::default();
                for p in &perms {
                    let mut img = 0usize;
                    for a in 0..ny {
                        img += idx[p[a]] * strides[a];
                    }
                    img += idx[ny] * strides[ny];
                    acc += vals[img];
                }
                next[flat] = acc * norm;
            });
            vals = next;
        }
        Self { grid: grid.clone(), values: vals, repr: Representation::Physical }
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn eval_at(&self, x: &[T]) -> Result<Complex<T>> {
        let grid = &self.grid;
        if x.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} on a {}-dimensional grid",
                x.len(),
                grid.dim()
            )));
        }
        let spec = self.spectrum();
        let half = T::one() / (T::one() + T::one());
        // per-axis phase tables e^{i k (x + L/2)}
        let tables: Vec<Vec<Complex<T>>> = (0..grid.dim())
            .map(|a| {
                let shift = x[a] + grid.lengths()[a] * half;
                grid.wavenumbers(a).iter().map(|&k| Complex::from_polar(T::one(), k * shift)).collect()
            })
            .collect();
        let mut acc = Complex::default();
        grid.for_each_index(|flat, idx| {
            let mut phase = Complex::new(T::one(), T::zero());
            for (a, &i) in idx.iter().enumerate() {
                phase *= tables[a][i];
            }
            acc += spec[flat] * phase;
        });
        Ok(acc / count::<T>(grid.len()))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3() -> Arc<Grid<f64>> {
        Grid::new(&[8, 8, 6], &[4.0, 4.0, 3.0]).unwrap()
    }

    #[test]
    fn round_trip_is_accurate() {
        let g = grid3();
        let f = Field::from_fn(&g, |x| Complex::new((x[0] * 1.3).sin() + x[2], x[1].cos()));
        let back = f.to_frequency().into_physical();
        let rel = f.l2_distance(&back).unwrap() / f.l2_distance(&Field::zeros(&g)).unwrap();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn symmetrize_produces_invariant_field() {
        let g = grid3();
        let f = Field::from_fn(&g, |x| Complex::new(x[0] + 0.3 * x[1] * x[1], x[2] * x[0]));
        assert!(f.y_symmetry_deviation() > 0.1);
        let s = f.symmetrize_y();
        assert!(s.y_symmetry_deviation() < 1e-14);
        let radial = Field::from_real_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]) - x[2]).exp());
        assert!(radial.y_symmetry_deviation() < 1e-13);
    }

    #[test]
    fn interpolant_matches_samples_and_band_limited_values() {
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::<f64>::new(&[16, 8], &[l, l]).unwrap();
        let f = Field::from_fn(&g, |x| Complex::from_polar(1.0, 3.0 * x[0] + x[1]));
        let v = f.eval_at(&[0.123, -0.7]).unwrap();
        let exact = Complex::from_polar(1.0, 3.0 * 0.123 - 0.7);
        assert!((v - exact).norm() < 1e-12);
        let at_node = f.eval_at(&[g.coords(0)[3], g.coords(1)[5]]).unwrap();
        assert!((at_node - f.values()[3 * 8 + 5]).norm() < 1e-12);
    }

    #[test]
    fn non_finite_is_detected() {
        let g = grid3();
        let mut f = Field::zeros(&g);
        f.values_mut()[7] = Complex::new(f64::NAN, 0.0);
        assert_eq!(f.check_finite(), Err(Error::NonFinite { count: 1, total: g.len() }));
    }
}
