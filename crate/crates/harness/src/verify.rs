//! The inequality suite behind the `verify` subcommand.

use fracnls::inequality::{
    chain_ratios, fid_identity_check, gn_ratio, hessian_formula_check, radial_sobolev_ratio, tail_doubling_factor,
    KERNEL_SELF_TEST_TOL,
};
use fracnls::{corpus, Field64, Grid64, Params64};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Check { name: name.into(), value, tolerance, passed: value <= tolerance, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub s: f64,
    pub sigma: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub s: f64,
    pub sigma: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { s: 0.7, sigma: 0.6 }
    }
}

pub const DILATIONS: [f64; 3] = [0.5, 2.0, 4.0];
pub const DILATION_TOL: f64 = 1e-6;
pub const FID_TOL: f64 = 1e-4;
/// Largest growth of the normalized tail ratio across one doubling of `R`.
pub const DOUBLING_TOL: f64 = 1.3;
pub const HESSIAN_TOL: f64 = 1e-6;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Largest relative change of the radial Sobolev ratio of `exp(-lambda |y|^2)`
/// under dilation. Each box is dilated with the profile, so the discrete
/// problems are exact rescalings and only the exponents are tested.
pub fn sobolev_dilation_spread(s: f64) -> Result<f64> {
    let ratio = |lambda: f64| -> Result<f64> {
        let l = 20.0 / lambda.sqrt();
        let g = Grid64::new(&[128, 128], &[l, l])?;
        let f = Field64::from_real_fn(&g, |y| (-lambda * (y[0] * y[0] + y[1] * y[1])).exp());
        Ok(radial_sobolev_ratio(&f, 1.0 / lambda.sqrt(), s)?.ratio)
    };
    let base = ratio(1.0)?;
    DILATIONS.iter().try_fold(0.0f64, |m, &l| Ok(m.max(rel(ratio(l)?, base))))
}

/// Largest relative change of the Gagliardo-Nirenberg ratio (`p = 4`) of a
/// Gaussian under dilation, on a box long enough for the lattice error of
/// the seminorm to fall below the tolerance.
pub fn gn_dilation_spread(s: f64) -> Result<f64> {
    let g = Grid64::new(&[1 << 17], &[4000.0])?;
    let ratio = |lambda: f64| -> Result<f64> {
        let f = Field64::from_real_fn(&g, |x| (-lambda * x[0] * x[0]).exp());
        Ok(gn_ratio(&f, 4.0, s)?.ratio)
    };
    let base = ratio(1.0)?;
    DILATIONS.iter().try_fold(0.0f64, |m, &l| Ok(m.max(rel(ratio(l)?, base))))
}

pub fn run_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    let (s, sigma) = (opts.s, opts.sigma);
    let mut checks = Vec::new();

    let spread = sobolev_dilation_spread(s)?;
    checks.push(Check::at_most(
        "radial Sobolev ratio dilation invariance",
        spread,
        DILATION_TOL,
        format!("largest relative change over lambda in {DILATIONS:?}"),
    ));
    let spread = gn_dilation_spread(s)?;
    checks.push(Check::at_most(
        "Gagliardo-Nirenberg ratio dilation invariance",
        spread,
        DILATION_TOL,
        format!("p = 4, largest relative change over lambda in {DILATIONS:?}"),
    ));

    let g = Grid64::new(&[512], &[40.0])?;
    let u = Field64::from_real_fn(&g, |x| (-x[0] * x[0] / 2.0).exp());
    let fid = fid_identity_check(&u, s)?;
    checks.push(Check::at_most(
        "pointwise product identity kernel self-test",
        fid.self_test_error,
        KERNEL_SELF_TEST_TOL,
        "periodic kernel against 2 k^s on one Fourier mode".into(),
    ));
    checks.push(Check::at_most(
        "pointwise product identity residual",
        fid.residual / fid.scale,
        FID_TOL,
        format!("residual {:e} over scale {:e}", fid.residual, fid.scale),
    ));

    let g3 = Grid64::cubic(3, 48, 24.0)?;
    let params = Params64::new(3, s, sigma)?;
    let u = corpus::gaussian(&g3, 1.0, 2.0, 2.0);
    let r2 = chain_ratios(&u, &params, 2.0)?;
    let r4 = chain_ratios(&u, &params, 4.0)?;
    let factor = tail_doubling_factor(&r2, &r4);
    checks.push(Check::at_most(
        "tail ratio growth across R = 2 -> 4",
        factor,
        DOUBLING_TOL,
        format!("tail {:e} -> {:e}, R^(-sigma(N-2)) predicts x{:.4}", r2.tail.lhs, r4.tail.lhs, 2f64.powf(-sigma)),
    ));
    let holder = r2.holder_split.ratio.max(r4.holder_split.ratio);
    checks.push(Check::at_most(
        "tail Holder split",
        holder,
        1.0 + 1e-12,
        "tail against sup^sigma slab^(1-sigma)".into(),
    ));

    let g3 = Grid64::cubic(3, 32, 16.0)?;
    let chk = hessian_formula_check(&g3, |r| {
        let e = (-r * r / 2.0).exp();
        [e, -r * e, (r * r - 1.0) * e]
    })?;
    checks.push(Check::at_most(
        "radial Hessian formula",
        chk.residual / chk.scale,
        HESSIAN_TOL,
        "spectral Hessian of a radial Gaussian against the closed form".into(),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { s, sigma, checks, passed })
}
