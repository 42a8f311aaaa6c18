//! Special functions needed by the kernel quadratures (f64 only).

use std::f64::consts::PI;

pub use statrs::function::gamma::gamma;

const BERNOULLI_EVEN: [f64; 7] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];

/// Hurwitz zeta `sum_{k>=0} (k + a)^{-s}` for `s > 1`, `a > 0`
/// (direct sum plus Euler-Maclaurin tail).
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0 (s = {s}, a = {a})");
    const M: usize = 12;
    let mut sum: f64 = (0..M).map(|k| (k as f64 + a).powf(-s)).sum();
    let x = M as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xpow = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * xpow;
        sum += term;
        let m = 2.0 * j as f64 + 2.0;
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        xpow /= x * x;
    }
    sum
}

/// Riemann zeta for real `s != 1`; negative arguments use the reflection formula.
pub fn zeta(s: f64) -> f64 {
    if s > 1.0 {
        hurwitz_zeta(s, 1.0)
    } else if s < 0.0 {
        let t = 1.0 - s;
        2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma(t) * hurwitz_zeta(t, 1.0)
    } else {
        panic!("zeta evaluated outside (-inf, 0) U (1, inf): {s}")
    }
}

/// `int_R (1 - cos x) / |x|^{1+s} dx` in closed form, `0 < s < 2`.
pub fn one_minus_cos_moment(s: f64) -> f64 {
    2.0 * gamma(1.0 - s) * (PI * s / 2.0).cos() / s
}
