//! Localized virial quantities, the resolvent family `u_m`, and the
//! term-by-term right-hand side of the virial identity.

use num_complex::Complex;

use crate::cutoff::{CylWeight, RadialSample};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::ModelParams;
use crate::quadrature::{resolvent_constant, ResolventQuadrature};
use crate::scalar::{lit, to_f64, Real};
use crate::spectral::{apply_symbol, energy, gradient, sobolev_seminorm_sq};

/// Which localized weight drives the virial quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `phi_R = psi_R(|y|) + x_N^2 / 2` (class `Sigma_N`).
    Phi,
    /// `psi_R(|y|)` with `y`-gradients only (class `Sigma`).
    Psi,
}

/// `u_m = c_s (-Delta + m)^{-1} u`.
pub fn resolvent<T: Real>(u: &Field<T>, s: f64, m: f64) -> Result<Field<T>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("resolvent parameter must be positive, got {m}")));
    }
    u.check_finite()?;
    let c: T = lit(resolvent_constant(s));
    let m: T = lit(m);
    let ksq = u.grid().k_squared().to_vec();
    let mut spec = u.to_frequency();
    spec.values_mut().iter_mut().zip(&ksq).for_each(|(v, &k2)| *v *= c / (k2 + m));
    Ok(spec.into_physical())
}

fn virial_moment<T: Real>(u: &Field<T>, weight: &CylWeight, variant: Variant) -> Result<T> {
    let grid = u.grid().clone();
    if grid.dim() != weight.dim() {
        return Err(Error::GridMismatch(format!("weight for N = {} on N = {} grid", weight.dim(), grid.dim())));
    }
    let d = grid.dim() - 1;
    let grads = gradient(u)?;
    let grads: Vec<_> = grads.iter().map(|g| g.physical().into_owned()).collect();
    let vals = u.physical();
    let radius = weight.radius();
    let mut acc = 0.0;
    grid.for_each_point(|flat, x| {
        let r = x[..d].iter().map(|v| to_f64(*v).powi(2)).sum::<f64>().sqrt();
        let h = crate::cutoff::transition(r / radius)[0];
        let mut dir = Complex::<f64>::default();
        for a in 0..d {
            let g = grads[a][flat];
            dir += Complex::new(to_f64(g.re), to_f64(g.im)) * (h * to_f64(x[a]));
        }
        if variant == Variant::Phi {
            let g = grads[d][flat];
            dir += Complex::new(to_f64(g.re), to_f64(g.im)) * to_f64(x[d]);
        }
        let v = vals[flat];
        acc += (Complex::new(to_f64(v.re), -to_f64(v.im)) * dir).im;
    });
    Ok(lit(2.0 * acc * to_f64(grid.cell_volume())))
}

/// `M_{phi_R}[u] = 2 Im int conj(u) (grad phi_R . grad u)`.
pub fn virial_phi<T: Real>(u: &Field<T>, weight: &CylWeight) -> Result<T> {
    virial_moment(u, weight, Variant::Phi)
}

/// `M_{psi_R}[u] = 2 Im int conj(u) (grad psi_R . grad_y u)`.
pub fn virial_psi<T: Real>(u: &Field<T>, weight: &CylWeight) -> Result<T> {
    virial_moment(u, weight, Variant::Psi)
}

pub fn virial_value<T: Real>(u: &Field<T>, weight: &CylWeight, variant: Variant) -> Result<T> {
    virial_moment(u, weight, variant)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalakrishnanCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

/// `sum_j W_j int |grad u_{m_j}|^2` against `s ||(-Delta)^{s/2} u||_2^2`.
pub fn balakrishnan_check<T: Real>(u: &Field<T>, quad: &ResolventQuadrature) -> Result<BalakrishnanCheck> {
    quad.validate()?;
    let s = quad.s();
    let rhs = s * to_f64(sobolev_seminorm_sq(u, lit(s)));
    let mut lhs = 0.0;
    for (&m, &w) in quad.nodes().iter().zip(quad.weights()) {
        let um = resolvent(u, s, m)?;
        let g2: f64 = gradient(&um)?.iter().map(|g| to_f64(crate::spectral::mass(g))).sum();
        lhs += w * g2;
    }
    let relative_error = if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (lhs - rhs).abs() / rhs
    };
    Ok(BalakrishnanCheck { lhs, rhs, relative_error })
}

/// Raw integrals from one pass over the quadrature nodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RhsIntegrals {
    pub dim: usize,
    pub s: f64,
    pub sigma: f64,
    /// `sum W int |grad_y u_m|^2`.
    pub grad_y: f64,
    /// `sum W int |d_N u_m|^2`.
    pub grad_n: f64,
    /// `sum W int sum_{k,l<N} conj(d_k u_m) d_kl psi_R d_l u_m`.
    pub hess_y: f64,
    /// `sum W int psi~_1 |grad_y u_m|^2`.
    pub k1: f64,
    /// `sum W int psi~_2^{N/(N+2s)} |grad u_m|^2`.
    pub k2: f64,
    /// `sum W int (Delta^2 psi_R) |u_m|^2`, without the square of the zero mode of `u_m`.
    pub bilap_integral: f64,
    /// `int |u|^{2 sigma + 2}`.
    pub potential: f64,
    /// `int (Delta psi_R) |u|^{2 sigma + 2}`.
    pub lap_potential: f64,
    /// `int psi~_2 |u|^{2 sigma + 2}` (supported in `|y| >= R`).
    pub tail: f64,
    /// `||(-Delta)^{s/2} u||_2^2`.
    pub grad_s_sq: f64,
    pub energy: f64,
    /// Largest pointwise value of the cross-term integrand (should be `<= 0`).
    pub cross_pointwise_max: f64,
    /// Largest pointwise value of `(Delta psi_R - N + 1) |u|^{2 sigma + 2}`.
    pub tail_pointwise_max: f64,
    pub nodes: usize,
    pub quadrature_scale: f64,
}

/// Term-by-term right-hand side of the virial identity for one variant.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsTerms {
    pub kinetic: f64,
    pub bilap: f64,
    pub nonlinear: f64,
    /// Nonlinear term through the split `N int |u|^p + int (Delta psi_R - N + 1) |u|^p`.
    pub nonlinear_split: f64,
    /// Kinetic minus `4 sum W int |grad u_m|^2` (respectively `|grad_y u_m|^2`).
    pub cross: f64,
    /// `4 s ||(-Delta)^{s/2} u||_2^2`.
    pub kinetic_bound: f64,
}

impl RhsTerms {
    pub fn total(&self) -> f64 {
        self.kinetic + self.bilap + self.nonlinear
    }

    /// Largest term magnitude; the natural scale for relative residuals.
    pub fn scale(&self) -> f64 {
        self.kinetic.abs().max(self.bilap.abs()).max(self.nonlinear.abs())
    }
}

impl RhsIntegrals {
    fn coupling(&self) -> f64 {
        2.0 * self.sigma / (self.sigma + 1.0)
    }

    pub fn terms(&self, variant: Variant) -> RhsTerms {
        let c = self.coupling();
        let n = self.dim as f64;
        let bilap = -self.bilap_integral;
        let kinetic_bound = 4.0 * self.s * self.grad_s_sq;
        match variant {
            Variant::Phi => RhsTerms {
                kinetic: 4.0 * (self.hess_y + self.grad_n),
                bilap,
                nonlinear: -c * (self.lap_potential + self.potential),
                nonlinear_split: -c * (n * self.potential - self.tail),
                cross: 4.0 * (self.hess_y - self.grad_y),
                kinetic_bound,
            },
            Variant::Psi => RhsTerms {
                kinetic: 4.0 * self.hess_y,
                bilap,
                nonlinear: -c * self.lap_potential,
                nonlinear_split: -c * ((n - 1.0) * self.potential - self.tail),
                cross: 4.0 * (self.hess_y - self.grad_y),
                kinetic_bound,
            },
        }
    }

    /// Leading part of the upper bound with the implicit constants dropped:
    /// `4 sigma n E - 2 (sigma n - 2 s) G^2` with `n = N` (`Phi`) or `N - 1` (`Psi`).
    pub fn leading_bound(&self, variant: Variant, energy0: f64) -> f64 {
        let n = match variant {
            Variant::Phi => self.dim as f64,
            Variant::Psi => self.dim as f64 - 1.0,
        };
        4.0 * self.sigma * n * energy0 - 2.0 * (self.sigma * n - 2.0 * self.s) * self.grad_s_sq
    }

    /// Measured size of the terms the bound absorbs into constants: the
    /// bi-Laplacian term and the exterior nonlinear tail.
    pub fn measured_remainder(&self) -> f64 {
        self.bilap_integral.abs() + self.coupling() * self.tail
    }
}

/// Evaluates every right-hand-side integral for both weights in one pass
/// (`N + 1` inverse transforms per quadrature node).
pub fn rhs_integrals<T: Real>(
    u: &Field<T>,
    weight: &CylWeight,
    quad: &ResolventQuadrature,
    params: &ModelParams<T>,
) -> Result<RhsIntegrals> {
    quad.validate()?;
    let grid = u.grid().clone();
    let dim = grid.dim();
    if dim != weight.dim() || dim != params.dim() {
        return Err(Error::GridMismatch("weight, parameters and field disagree on N".into()));
    }
    u.check_finite()?;
    let s = to_f64(params.s());
    let sigma = to_f64(params.sigma());
    let d = dim - 1;
    let samples: Vec<RadialSample> = weight.sample(&grid)?;
    let hessian = weight.hessian_psi(&grid)?;
    let k2_power = dim as f64 / (dim as f64 + 2.0 * s);
    let k2_weight: Vec<f64> = samples.iter().map(|r| r.tilde2.max(0.0).powf(k2_power)).collect();
    let dv = to_f64(grid.cell_volume());
    let c_s = resolvent_constant(s);
    let spec = u.spectrum().into_owned();
    let ksq: Vec<f64> = grid.k_squared().iter().map(|&k| to_f64(k)).collect();
    let kvec: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            (0..grid.shape()[a])
                .map(|i| if grid.is_nyquist(a, i) { 0.0 } else { to_f64(grid.wavenumbers(a)[i]) })
                .collect()
        })
        .collect();
    let mut idx_axis = vec![vec![0usize; grid.len()]; dim];
    grid.for_each_index(|flat, idx| idx.iter().enumerate().for_each(|(a, &i)| idx_axis[a][flat] = i));

    let mut out =
        RhsIntegrals { dim, s, sigma, nodes: quad.len(), quadrature_scale: quad.scale(), ..Default::default() };
    out.cross_pointwise_max = f64::NEG_INFINITY;
    let mut comps: Vec<Vec<Complex<T>>> = vec![vec![Complex::default(); grid.len()]; dim + 1];
    for (&m, &w) in quad.nodes().iter().zip(quad.weights()) {
        // spectra of u_m (zero mode dropped) and its partials
        for (flat, v) in spec.iter().enumerate() {
            let factor = if ksq[flat] > 0.0 { c_s / (ksq[flat] + m) } else { 0.0 };
            let um = *v * lit::<T>(factor);
            comps[dim][flat] = um;
            for a in 0..dim {
                let k = kvec[a][idx_axis[a][flat]];
                comps[a][flat] = um * Complex::new(T::zero(), lit(k));
            }
        }
        for c in comps.iter_mut() {
            grid.inverse(c);
        }
        let (mut gy, mut gn, mut hy, mut k1, mut k2, mut bl) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let contracted = hessian.contract(&comps[..dim]);
        for flat in 0..grid.len() {
            let mut gy_pt = 0.0;
            for comp in comps.iter().take(d) {
                gy_pt += to_f64(comp[flat].norm_sqr());
            }
            let gn_pt = to_f64(comps[d][flat].norm_sqr());
            let hy_pt = to_f64(contracted[flat]);
            let r = &samples[flat];
            gy += gy_pt;
            gn += gn_pt;
            hy += hy_pt;
            k1 += r.tilde1 * gy_pt;
            k2 += k2_weight[flat] * (gy_pt + gn_pt);
            bl += r.bilaplacian * to_f64(comps[dim][flat].norm_sqr());
            out.cross_pointwise_max = out.cross_pointwise_max.max(hy_pt - gy_pt);
        }
        out.grad_y += w * gy * dv;
        out.grad_n += w * gn * dv;
        out.hess_y += w * hy * dv;
        out.k1 += w * k1 * dv;
        out.k2 += w * k2 * dv;
        out.bilap_integral += w * bl * dv;
    }

    // The zero mode of u_m is the constant c_s u_bar / m. Its square integrates
    // against Delta^2 psi_R to zero; the cross term with the other modes has
    // the closed form int m^{s-1} / (k^2 + m) dm = pi k^{2(s-1)} / sin(pi s).
    let vals = u.physical();
    let mean = vals.iter().fold(Complex::<T>::default(), |a, v| a + *v) / lit::<T>(grid.len() as f64);
    let tilted = apply_symbol(u, |flat, _| {
        let k2 = ksq[flat];
        Complex::new(lit(if k2 > 0.0 { k2.powf(s - 1.0) } else { 0.0 }), T::zero())
    })?;
    let cross: f64 =
        tilted.physical().iter().zip(&samples).map(|(w, r)| r.bilaplacian * to_f64((mean.conj() * *w).re)).sum();
    out.bilap_integral += 2.0 * cross * dv;

    let p = 2.0 * sigma + 2.0;
    out.tail_pointwise_max = f64::NEG_INFINITY;
    for (v, r) in vals.iter().zip(&samples) {
        let a = to_f64(v.norm_sqr()).powf(0.5 * p);
        out.potential += a;
        out.lap_potential += r.laplacian * a;
        out.tail += r.tilde2 * a;
        out.tail_pointwise_max = out.tail_pointwise_max.max(-r.tilde2 * a);
    }
    out.potential *= dv;
    out.lap_potential *= dv;
    out.tail *= dv;
    out.grad_s_sq = to_f64(sobolev_seminorm_sq(u, params.s()));
    out.energy = to_f64(energy(u, params));
    Ok(out)
}

/// Identity check at one time: value, centred derivative, rhs terms.
#[derive(Clone, Debug, PartialEq)]
pub struct VirialReport {
    pub radius: f64,
    pub variant: Variant,
    pub m_value: f64,
    pub dmdt_fd: Option<f64>,
    pub terms: RhsTerms,
    /// `dmdt_fd - total`, when a derivative is available.
    pub residual: Option<f64>,
    /// `|residual| / terms.scale()`.
    pub relative_residual: Option<f64>,
    /// Leading bound plus measured remainder.
    pub bound_value: f64,
    pub integrals: RhsIntegrals,
}

/// Options for [`virial_rhs`].
#[derive(Clone, Copy, Debug)]
pub struct RhsOptions {
    /// Omit the nonlinear term (linear flow).
    pub linear: bool,
    /// Relative tolerance on the agreement of the two nonlinear evaluations.
    pub split_tolerance: f64,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self { linear: false, split_tolerance: 1e-10 }
    }
}

pub fn virial_rhs<T: Real>(
    u: &Field<T>,
    weight: &CylWeight,
    quad: &ResolventQuadrature,
    params: &ModelParams<T>,
    variant: Variant,
    opts: &RhsOptions,
) -> Result<VirialReport> {
    let integrals = rhs_integrals(u, weight, quad, params)?;
    let m_value = to_f64(virial_value(u, weight, variant)?);
    report_from(integrals, m_value, None, weight.radius(), variant, opts)
}

/// Builds a report from precomputed integrals and an optional centred derivative.
pub fn report_from(
    integrals: RhsIntegrals,
    m_value: f64,
    dmdt_fd: Option<f64>,
    radius: f64,
    variant: Variant,
    opts: &RhsOptions,
) -> Result<VirialReport> {
    let mut terms = integrals.terms(variant);
    let gap = (terms.nonlinear - terms.nonlinear_split).abs();
    if gap > opts.split_tolerance * terms.nonlinear.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!(
            "nonlinear term evaluations disagree: {} vs {}",
            terms.nonlinear, terms.nonlinear_split
        )));
    }
    if opts.linear {
        terms.nonlinear = 0.0;
        terms.nonlinear_split = 0.0;
    }
    let residual = dmdt_fd.map(|d| d - terms.total());
    let relative_residual = residual.map(|r| r.abs() / terms.scale().max(f64::MIN_POSITIVE));
    let bound_value = integrals.leading_bound(variant, integrals.energy) + integrals.measured_remainder();
    Ok(VirialReport { radius, variant, m_value, dmdt_fd, terms, residual, relative_residual, bound_value, integrals })
}

/// Centred difference `(f(t + delta) - f(t - delta)) / (2 delta)`.
pub fn centred_difference(minus: f64, plus: f64, delta: f64) -> f64 {
    (plus - minus) / (2.0 * delta)
}

/// Residual of the identity at every interior snapshot of a uniformly
/// sampled trajectory.
pub fn virial_residual<T: Real>(
    samples: &[(f64, Field<T>)],
    weight: &CylWeight,
    quad_nodes: usize,
    params: &ModelParams<T>,
    variant: Variant,
    opts: &RhsOptions,
) -> Result<Vec<VirialReport>> {
    if samples.len() < 3 {
        return Err(Error::Sampling(format!("need at least 3 snapshots, got {}", samples.len())));
    }
    let dt = samples[1].0 - samples[0].0;
    for w in samples.windows(2) {
        let step = w[1].0 - w[0].0;
        if !(dt > 0.0) || (step - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(Error::Sampling(format!("snapshot spacing {step} differs from {dt}")));
        }
    }
    let values: Vec<f64> =
        samples.iter().map(|(_, u)| virial_value(u, weight, variant).map(to_f64)).collect::<Result<_>>()?;
    let s = to_f64(params.s());
    (1..samples.len() - 1)
        .map(|i| {
            let u = &samples[i].1;
            let quad = ResolventQuadrature::for_field(s, u, quad_nodes)?;
            let integrals = rhs_integrals(u, weight, &quad, params)?;
            let fd = centred_difference(values[i - 1], values[i + 1], dt);
            report_from(integrals, values[i], Some(fd), weight.radius(), variant, opts)
        })
        .collect()
}

/// Mass-critical refinement: the pieces of the refined bound at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedTerms {
    pub eta: f64,
    /// `8 s E`.
    pub leading: f64,
    /// `int int m^s psi~_1 |grad_y u_m|^2` (nonnegative).
    pub k1: f64,
    /// `int int m^s psi~_2^{N/(N+2s)} |grad u_m|^2`.
    pub k2: f64,
    /// `int_{|y| >= R} psi~_2 |u|^{4s/N + 2}`.
    pub tail: f64,
    /// `4 eta / (N + 2s) * k2`.
    pub eta_term: f64,
    /// Bi-Laplacian contribution (the `R^{-2s}` piece).
    pub bilap: f64,
    /// `|bilap| + eta_term + max(0, 4s/(N+2s) tail - eta_term)`.
    pub remainder: f64,
    /// `8 s E - 4 k1 + remainder`.
    pub bound: f64,
}

pub fn refined_terms<T: Real>(
    u: &Field<T>,
    weight: &CylWeight,
    quad: &ResolventQuadrature,
    params: &ModelParams<T>,
    eta: f64,
    energy0: f64,
) -> Result<RefinedTerms> {
    if !params.is_mass_critical() {
        return Err(Error::Params(format!(
            "refined terms need the mass-critical power sigma = 2s/N (s_c = {})",
            to_f64(params.s_c())
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    let ints = rhs_integrals(u, weight, quad, params)?;
    Ok(refine(&ints, eta, energy0))
}

/// Refined bound pieces from precomputed integrals.
pub fn refine(ints: &RhsIntegrals, eta: f64, energy0: f64) -> RefinedTerms {
    let n = ints.dim as f64;
    let s = ints.s;
    let leading = 8.0 * s * energy0;
    let eta_term = 4.0 * eta / (n + 2.0 * s) * ints.k2;
    let tail_coeff = 4.0 * s / (n + 2.0 * s);
    let bilap = -ints.bilap_integral;
    let remainder = bilap.abs() + eta_term + (tail_coeff * ints.tail - eta_term).max(0.0);
    RefinedTerms {
        eta,
        leading,
        k1: ints.k1,
        k2: ints.k2,
        tail: ints.tail,
        eta_term,
        bilap,
        remainder,
        bound: leading - 4.0 * ints.k1 + remainder,
    }
}
