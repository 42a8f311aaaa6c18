//! Gauss rules, adaptive Gauss-Kronrod, and the `m`-quadrature behind the
//! resolvent representation of fractional kinetic terms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{to_f64, Real};
use crate::special::gamma;

/// Nodes and weights on `[-1, 1]` for the weight `(1-x)^alpha (1+x)^beta`
/// (Golub-Welsch). Requires `alpha + beta == 0` or both `> -1` with
/// `alpha + beta > -1`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        jac[(i, i)] = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
        };
        if i + 1 < n {
            let k = k + 1.0;
            let c = 2.0 * k + ab;
            let b = (4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (c * c * (c + 1.0) * (c - 1.0))).sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi(n, 0.0, 0.0)
}

/// `int_a^b f` by composite `n`-point Gauss-Legendre on `panels` equal panels.
pub fn composite_gauss_legendre(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let width = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            sum += w * f(mid + 0.5 * width * x);
        }
    }
    0.5 * width * sum
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        k += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) with absolute tolerance `tol`. Panels stop
/// splitting once the error estimate reaches roundoff of the panel value.
pub fn adaptive_gk(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = kronrod15(f, a, b);
        if err <= tol.max(50.0 * f64::EPSILON * v.abs()) || depth >= 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}

/// `c_s = sqrt(sin(pi s) / pi)`.
pub fn resolvent_constant(s: f64) -> f64 {
    ((PI * s).sin() / PI).sqrt()
}

/// Closed form of `int_0^inf m^s / (a + m)^2 dm`.
pub fn beta_integral(s: f64, a: f64) -> f64 {
    a.powf(s - 1.0) * s * PI / (PI * s).sin()
}

/// Nodes `m_j` and weights `W_j` with `sum_j W_j f(m_j) ~ int_0^inf m^s f(m) dm`.
///
/// The substitution `m = mu t / (1 - t)` turns `m^s dm` into
/// `mu^{1+s} t^s (1-t)^{-s} (1-t)^{-2} dt`; the algebraic factor is absorbed
/// into a Gauss-Jacobi rule so resolvent-type integrands `(a + m)^{-2}` become
/// smooth on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct ResolventQuadrature {
    s: f64,
    scale: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_NODES: usize = 64;
pub const GATE_TOLERANCE: f64 = 1e-8;
pub const GATE_RATIOS: [f64; 4] = [0.25, 1.0, 4.0, 64.0];

impl ResolventQuadrature {
    pub fn new(s: f64, scale: f64, count: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidArgument(format!("fractional order {s} outside (0, 1)")));
        }
        if !(scale > 0.0 && scale.is_finite()) || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs a positive scale and node count (scale {scale}, nodes {count})"
            )));
        }
        let (x, w) = gauss_jacobi(count, -s, s);
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for (xi, wi) in x.into_iter().zip(w) {
            let t = 0.5 * (1.0 + xi);
            nodes.push(scale * t / (1.0 - t));
            weights.push(0.5 * wi * scale.powf(1.0 + s) / ((1.0 - t) * (1.0 - t)));
        }
        Ok(Self { s, scale, nodes, weights })
    }

    /// Quadrature scaled to the median `|k|^2` of the field's spectral mass
    /// (zero mode excluded), then gated.
    pub fn for_field<T: Real>(s: f64, u: &Field<T>, count: usize) -> Result<Self> {
        let q = Self::new(s, spectral_median(u), count)?;
        q.validate()?;
        Ok(q)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&m, &w)| w * f(m)).sum()
    }

    /// Relative error of the rule on `int m^s/(a+m)^2`.
    pub fn beta_error(&self, a: f64) -> f64 {
        let approx = self.integrate(|m| 1.0 / ((a + m) * (a + m)));
        (approx / beta_integral(self.s, a) - 1.0).abs()
    }

    /// Checks the closed form at every `a` in `points`.
    pub fn gate(&self, points: &[f64], tol: f64) -> Result<()> {
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::QuadratureGate("non-positive weight".into()));
        }
        for &a in points {
            let err = self.beta_error(a);
            if !(err < tol) {
                return Err(Error::QuadratureGate(format!(
                    "relative error {err:e} at a = {a} (s = {}, scale = {}, {} nodes)",
                    self.s,
                    self.scale,
                    self.len()
                )));
            }
        }
        Ok(())
    }

    /// Gate at `a = scale * {0.25, 1, 4, 64}` with tolerance `1e-8`.
    pub fn validate(&self) -> Result<()> {
        let pts: Vec<f64> = GATE_RATIOS.iter().map(|r| r * self.scale).collect();
        self.gate(&pts, GATE_TOLERANCE)
    }
}

/// Median of `|k|^2` under the spectral mass `|u_hat(k)|^2`, zero mode
/// excluded; `1` for fields without nonzero modes.
pub fn spectral_median<T: Real>(u: &Field<T>) -> f64 {
    let spec = u.spectrum();
    let ksq = u.grid().k_squared();
    let mut pairs: Vec<(f64, f64)> = spec
        .iter()
        .zip(ksq)
        .filter(|(_, k)| to_f64(**k) > 0.0)
        .map(|(v, k)| (to_f64(*k), to_f64(v.norm_sqr())))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return 1.0;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for (k, w) in pairs {
        acc += w;
        if acc >= 0.5 * total {
            return k;
        }
    }
    1.0
}
