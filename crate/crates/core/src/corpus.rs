//! Reproducible test fields with cylindrical symmetry in `y`.
//!
//! Random fields are finite sums of separable Gaussian packets
//! `c e^{-a|y|^2} e^{-b (x_N - x0)^2} e^{i k x_N}` with parameters drawn from a
//! ChaCha stream. Their spectra are Gaussian, so they are band limited to
//! roundoff once the narrowest packet is resolved.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::grid::Grid;
use crate::scalar::{lit, to_f64, Real};

/// `amplitude exp(-|y|^2/(2 w_y^2) - x_N^2/(2 w_N^2))`.
pub fn gaussian<T: Real>(grid: &Arc<Grid<T>>, amplitude: f64, width_y: f64, width_n: f64) -> Field<T> {
    let d = grid.dim();
    Field::from_real_fn(grid, |x| {
        let (ry2, xn) = split(x, d);
        lit(amplitude * (-ry2 / (2.0 * width_y * width_y) - xn * xn / (2.0 * width_n * width_n)).exp())
    })
}

/// Ring `amplitude exp(-(|y| - r0)^2) exp(-x_N^2/(2 w_N^2))`.
pub fn ring<T: Real>(grid: &Arc<Grid<T>>, amplitude: f64, r0: f64, width_n: f64) -> Field<T> {
    let d = grid.dim();
    Field::from_real_fn(grid, |x| {
        let (ry2, xn) = split(x, d);
        let dr = ry2.sqrt() - r0;
        lit(amplitude * (-dr * dr - xn * xn / (2.0 * width_n * width_n)).exp())
    })
}

/// Bounds on the packets drawn by [`random_cylindrical`], in units of the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub packets: usize,
    pub amplitude: f64,
    /// Packet widths lie in `[min_width, max_width]` (standard deviations).
    pub min_width: f64,
    pub max_width: f64,
    /// Largest carrier wavenumber along `x_N`.
    pub max_wavenumber: f64,
}

impl RandomSpec {
    /// Widths between 2.5 grid spacings and a sixteenth of the shortest box
    /// side, so packets decay to roundoff before the box edge.
    pub fn for_grid<T: Real>(grid: &Grid<T>) -> Self {
        let h = grid.spacing().iter().fold(0.0f64, |m, &v| m.max(to_f64(v)));
        let l = grid.lengths().iter().fold(f64::INFINITY, |m, &v| m.min(to_f64(v)));
        let min_width = 2.5 * h;
        Self { packets: 4, amplitude: 1.0, min_width, max_width: (l / 16.0).max(min_width), max_wavenumber: 0.1 / h }
    }
}

/// Seeded random cylindrically symmetric field.
pub fn random_cylindrical<T: Real>(grid: &Arc<Grid<T>>, spec: &RandomSpec, seed: u64) -> Field<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let l_n = to_f64(grid.lengths()[d - 1]);
    struct Packet {
        c: Complex<f64>,
        a: f64,
        b: f64,
        x0: f64,
        k: f64,
    }
    let packets: Vec<Packet> = (0..spec.packets)
        .map(|_| {
            let wy = rng.gen_range(spec.min_width..=spec.max_width);
            let wn = rng.gen_range(spec.min_width..=spec.max_width);
            Packet {
                c: Complex::from_polar(
                    spec.amplitude * rng.gen_range(0.2..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
                a: 1.0 / (2.0 * wy * wy),
                b: 1.0 / (2.0 * wn * wn),
                x0: rng.gen_range(-0.05..0.05) * l_n,
                k: rng.gen_range(-spec.max_wavenumber..=spec.max_wavenumber),
            }
        })
        .collect();
    Field::from_fn(grid, |x| {
        let (ry2, xn) = split(x, d);
        let mut acc = Complex::new(0.0, 0.0);
        for p in &packets {
            let dx = xn - p.x0;
            acc += p.c * (-p.a * ry2 - p.b * dx * dx).exp() * Complex::from_polar(1.0, p.k * xn);
        }
        Complex::new(lit(acc.re), lit(acc.im))
    })
}

/// A labelled field of the standard corpus.
pub struct Sample<T: Real> {
    pub label: String,
    pub field: Field<T>,
}

/// `count` fields cycling through Gaussians, rings and random packets. Random
/// members use seeds `seed, seed + 1, ...`.
pub fn standard<T: Real>(grid: &Arc<Grid<T>>, count: usize, seed: u64) -> Vec<Sample<T>> {
    let l = grid.lengths().iter().fold(f64::INFINITY, |m, &v| m.min(to_f64(v)));
    let base = RandomSpec::for_grid(grid);
    (0..count)
        .map(|i| {
            let t = (i / 3) as f64;
            match i % 3 {
                0 => {
                    let w = l * (0.03 + 0.006 * t);
                    Sample { label: format!("gaussian w={w:.3}"), field: gaussian(grid, 1.0, w, 1.3 * w) }
                }
                1 => {
                    let r0 = l * (0.08 + 0.01 * t);
                    Sample { label: format!("ring r0={r0:.3}"), field: ring(grid, 1.0, r0, l * 0.05) }
                }
                _ => {
                    let s = seed + i as u64;
                    Sample { label: format!("random seed={s}"), field: random_cylindrical(grid, &base, s) }
                }
            }
        })
        .collect()
}

fn split<T: Real>(x: &[T], d: usize) -> (f64, f64) {
    let ry2 = x[..d - 1].iter().map(|&v| to_f64(v * v)).sum::<f64>();
    (ry2, to_f64(x[d - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_reproducible_and_symmetric() {
        let g = Grid::<f64>::cubic(3, 16, 12.0).unwrap();
        let spec = RandomSpec::for_grid(&g);
        let a = random_cylindrical(&g, &spec, 7);
        let b = random_cylindrical(&g, &spec, 7);
        let c = random_cylindrical(&g, &spec, 8);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.y_symmetry_deviation() < 1e-14);
    }

    #[test]
    fn ring_peaks_at_its_radius() {
        let g = Grid::<f64>::cubic(3, 32, 16.0).unwrap();
        let f = ring(&g, 1.0, 3.0, 1.0);
        assert!((f.eval_at(&[3.0, 0.0, 0.0]).unwrap().re - 1.0).abs() < 1e-6);
    }
}
