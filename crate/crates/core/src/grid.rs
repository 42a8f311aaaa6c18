//! Periodic Cartesian grids and their discrete Fourier transforms.
//!
//! Axis order is row-major: the last axis varies fastest and plays the role
//! of `x_N`; the leading `N - 1` axes span the `y`-plane. The forward
//! transform uses `e^{-ik.x}` without normalization; the inverse carries the
//! `1 / prod(n_j)` factor.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

/// A generator of the discrete symmetry group acting on the `y`-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YSymmetry {
    /// `y_axis -> -y_axis`
    Flip(usize),
    /// exchange of two `y` axes
    Swap(usize, usize),
}

pub struct Grid<T: Real> {
    n: Vec<usize>,
    lengths: Vec<T>,
    spacing: Vec<T>,
    coords: Vec<Vec<T>>,
    wavenumbers: Vec<Vec<T>>,
    strides: Vec<usize>,
    total: usize,
    k_squared: Vec<T>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("lengths", &self.lengths).finish()
    }
}

impl<T: Real> Grid<T> {
    /// Builds a grid with `n[j]` points over a period `lengths[j]` per axis.
    ///
    /// Point counts must be even so that the coordinate set is closed under
    /// `x -> -x` and the Nyquist mode is well defined.
    pub fn new(n: &[usize], lengths: &[T]) -> Result<Arc<Self>> {
        if n.is_empty() || n.len() != lengths.len() {
            return Err(Error::Grid(format!(
                "need one point count and one length per axis (got {} and {})",
                n.len(),
                lengths.len()
            )));
        }
        if let Some(&bad) = n.iter().find(|&&m| m < 2 || m % 2 != 0) {
            return Err(Error::Grid(format!("point count {bad} is not an even number >= 2")));
        }
        if lengths.iter().any(|&l| !(l > T::zero()) || !l.is_finite()) {
            return Err(Error::Grid("box lengths must be positive and finite".into()));
        }

        let dim = n.len();
        let two_pi = T::PI() + T::PI();
        let spacing: Vec<T> = n.iter().zip(lengths).map(|(&m, &l)| l / count(m)).collect();
        let coords = n
            .iter()
            .zip(&spacing)
            .map(|(&m, &h)| {
                let half = (m / 2) as i64;
                (0..m as i64).map(|j| lit::<T>((j - half) as f64) * h).collect()
            })
            .collect();
        let wavenumbers: Vec<Vec<T>> = n
            .iter()
            .zip(lengths)
            .map(|(&m, &l)| {
                (0..m)
                    .map(|j| {
                        let idx = if j < m / 2 { j as i64 } else { j as i64 - m as i64 };
                        two_pi * lit::<T>(idx as f64) / l
                    })
                    .collect()
            })
            .collect();

        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * n[a + 1];
        }
        let total = n.iter().product();

        let mut k_squared = vec![T::zero(); total];
        let mut idx = vec![0usize; dim];
        for slot in k_squared.iter_mut() {
            *slot = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| wavenumbers[a][i] * wavenumbers[a][i])
                .fold(T::zero(), |acc, v| acc + v);
            advance(&mut idx, n);
        }

        let mut planner = FftPlanner::new();
        let forward = n.iter().map(|&m| planner.plan_fft_forward(m)).collect();
        let inverse = n.iter().map(|&m| planner.plan_fft_inverse(m)).collect();

        Ok(Arc::new(Self {
            n: n.to_vec(),
            lengths: lengths.to_vec(),
            spacing,
            coords,
            wavenumbers,
            strides,
            total,
            k_squared,
            forward,
            inverse,
        }))
    }

    /// `dim` axes with identical point count and period.
    pub fn cubic(dim: usize, n: usize, length: T) -> Result<Arc<Self>> {
        Self::new(&vec![n; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Coordinates of axis `a`, spanning `[-L/2, L/2)`.
    pub fn coords(&self, axis: usize) -> &[T] {
        &self.coords[axis]
    }

    /// Wavenumbers of axis `a` in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.wavenumbers[axis]
    }

    /// `|k|^2` at every frequency-space point.
    pub fn k_squared(&self) -> &[T] {
        &self.k_squared
    }

    /// Volume element `prod h_j`.
    pub fn cell_volume(&self) -> T {
        self.spacing.iter().fold(T::one(), |acc, &h| acc * h)
    }

    pub fn volume(&self) -> T {
        self.lengths.iter().fold(T::one(), |acc, &l| acc * l)
    }

    /// True when the Nyquist index of axis `a` is `i`.
    #[inline]
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.n[axis] / 2
    }

    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.n == other.n && self.lengths == other.lengths
    }

    /// Calls `f(flat_index, multi_index)` for every point in storage order.
    pub fn for_each_index(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut idx = vec![0usize; self.dim()];
        for flat in 0..self.total {
            f(flat, &idx);
            advance(&mut idx, &self.n);
        }
    }

    /// Calls `f(flat_index, x)` with the physical coordinates of every point.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[T])) {
        let mut idx = vec![0usize; self.dim()];
        let mut x = vec![T::zero(); self.dim()];
        for flat in 0..self.total {
            for (a, &i) in idx.iter().enumerate() {
                x[a] = self.coords[a][i];
            }
            f(flat, &x);
            advance(&mut idx, &self.n);
        }
    }

    /// Samples `f` at every grid point.
    pub fn sample<F>(&self, mut f: F) -> Vec<Complex<T>>
    where
        F: FnMut(&[T]) -> Complex<T>,
    {
        let mut out = Vec::with_capacity(self.total);
        self.for_each_point(|_, x| out.push(f(x)));
        out
    }

    /// `|y|` (radius in the plane of the first `N - 1` axes) at every point.
    pub fn y_radius(&self) -> Vec<T> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.total);
        self.for_each_point(|_, x| {
            let r2 = x[..d.saturating_sub(1)].iter().fold(T::zero(), |acc, &v| acc + v * v);
            out.push(r2.sqrt());
        });
        out
    }

    /// In-place unnormalized forward transform over all axes.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// In-place inverse transform, normalized by `1 / prod(n_j)`.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let scale = T::one() / count::<T>(self.total);
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        assert_eq!(data.len(), self.total, "buffer does not match grid");
        let dim = self.dim();
        let mut slab: Vec<Complex<T>> = Vec::new();
        for (a, plan) in plans.iter().enumerate().take(dim) {
            let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
            let na = self.n[a];
            let stride = self.strides[a];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            slab.resize(na * stride, Complex::default());
            for block in data.chunks_exact_mut(na * stride) {
                transpose::transpose(block, &mut slab, stride, na);
                plan.process_with_scratch(&mut slab, &mut scratch);
                transpose::transpose(&slab, block, na, stride);
            }
        }
    }

    /// Flat index of the image of `flat` under a `y`-plane symmetry.
    pub fn symmetry_image(&self, sym: YSymmetry, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            let j = match sym {
                YSymmetry::Flip(b) if b == a => (self.n[a] - i) % self.n[a],
                YSymmetry::Swap(b, c) if a == b => idx[c],
                YSymmetry::Swap(b, c) if a == c => idx[b],
                _ => i,
            };
            flat += j * self.strides[a];
        }
        flat
    }

    /// Generators of the exact discrete symmetry group of the `y`-plane:
    /// a sign flip per `y` axis, plus swaps of adjacent `y` axes that share
    /// point count and period.
    pub fn y_symmetry_generators(&self) -> Vec<YSymmetry> {
        let ny = self.dim().saturating_sub(1);
        let mut gens: Vec<YSymmetry> = (0..ny).map(YSymmetry::Flip).collect();
        for a in 1..ny {
            if self.n[a] == self.n[a - 1] && self.lengths[a] == self.lengths[a - 1] {
                gens.push(YSymmetry::Swap(a - 1, a));
            }
        }
        gens
    }
}

/// Odometer increment of a row-major multi-index.
#[inline]
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_span_half_open_box() {
        let g = Grid::<f64>::new(&[8, 4], &[2.0, 6.0]).unwrap();
        assert_eq!(g.coords(0)[0], -1.0);
        assert_eq!(g.coords(0)[7], 0.75);
        assert_eq!(g.coords(1)[0], -3.0);
        assert_eq!(g.len(), 32);
        // exact sign symmetry of the coordinate set
        let c = g.coords(0);
        for j in 1..8 {
            assert_eq!(c[j], -c[8 - j]);
        }
    }

    #[test]
    fn wavenumbers_symmetric_except_nyquist() {
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::<f64>::new(&[8], &[l]).unwrap();
        let k = g.wavenumbers(0);
        assert_eq!(k[..], [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        for j in 1..8 {
            if !g.is_nyquist(0, j) {
                assert_eq!(k[j], -k[8 - j]);
            }
        }
    }

    #[test]
    fn rejects_odd_or_empty_shapes() {
        assert!(Grid::<f64>::new(&[7], &[1.0]).is_err());
        assert!(Grid::<f64>::new(&[], &[]).is_err());
        assert!(Grid::<f64>::new(&[8], &[-1.0]).is_err());
        assert!(Grid::<f64>::new(&[8, 8], &[1.0]).is_err());
        assert!(Grid::<f64>::new(&[24, 24, 24, 24], &[1.0; 4]).is_ok());
    }

    #[test]
    fn transform_round_trip_3d() {
        let g = Grid::<f64>::new(&[8, 6, 4], &[1.0, 2.0, 3.0]).unwrap();
        let orig: Vec<Complex<f64>> =
            (0..g.len()).map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut data = orig.clone();
        g.forward(&mut data);
        g.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn forward_transform_of_single_mode() {
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::<f64>::new(&[8, 8], &[l, l]).unwrap();
        // e^{i(2 x_1 - x_2)}
        let mut data = g.sample(|x| Complex::from_polar(1.0, 2.0 * x[0] - x[1]));
        g.forward(&mut data);
        let hit = 2 * 8 + 7;
        for (i, v) in data.iter().enumerate() {
            if i == hit {
                assert!((v.norm() - 64.0).abs() < 1e-10);
            } else {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetry_images() {
        let g = Grid::<f64>::new(&[4, 4, 2], &[1.0; 3]).unwrap();
        assert_eq!(g.y_symmetry_generators(), vec![YSymmetry::Flip(0), YSymmetry::Flip(1), YSymmetry::Swap(0, 1)]);
        assert_eq!(g.symmetry_image(YSymmetry::Flip(0), &[1, 2, 1]), 3 * 8 + 2 * 2 + 1);
        assert_eq!(g.symmetry_image(YSymmetry::Flip(0), &[0, 2, 1]), 2 * 2 + 1);
        assert_eq!(g.symmetry_image(YSymmetry::Swap(0, 1), &[1, 3, 0]), 3 * 8 + 2);
    }
}
