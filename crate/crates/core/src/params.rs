use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

/// Dimension `N`, fractional order `s` and nonlinearity power `sigma` of
/// `i u_t = (-Delta)^s u - |u|^{2 sigma} u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T: Real> {
    dim: usize,
    s: T,
    sigma: T,
}

/// Tolerance used when classifying `s_c` as zero.
pub const CRITICAL_TOL: f64 = 1e-12;

impl<T: Real> ModelParams<T> {
    pub fn new(dim: usize, s: T, sigma: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Params("dimension must be at least 1".into()));
        }
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::Params(format!("fractional order s = {s} outside (0, 1)")));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::Params(format!("nonlinearity sigma = {sigma} must be positive")));
        }
        let n = count::<T>(dim);
        let two_s = s + s;
        if n > two_s {
            let bound = two_s / (n - two_s);
            if sigma >= bound {
                return Err(Error::Params(format!(
                    "sigma = {sigma} is energy-supercritical (needs sigma < 2s/(N-2s) = {bound})"
                )));
            }
        }
        Ok(Self { dim, s, sigma })
    }

    /// Mass-critical power `sigma = 2s/N`.
    pub fn mass_critical(dim: usize, s: T) -> Result<Self> {
        Self::new(dim, s, (s + s) / count::<T>(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Criticality index `N/2 - s/sigma`.
    pub fn s_c(&self) -> T {
        count::<T>(self.dim) / lit(2.0) - self.s / self.sigma
    }

    pub fn is_mass_critical(&self) -> bool {
        self.s_c().abs() <= lit(CRITICAL_TOL)
    }

    pub fn is_mass_supercritical(&self) -> bool {
        self.s_c() > lit(CRITICAL_TOL)
    }

    pub fn is_mass_subcritical(&self) -> bool {
        self.s_c() < -lit::<T>(CRITICAL_TOL)
    }

    pub fn sigma_leq_s(&self) -> bool {
        self.sigma <= self.s
    }

    /// Exponent `2 sigma + 2` of the potential energy density.
    pub fn potential_exponent(&self) -> T {
        self.sigma + self.sigma + lit(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criticality_index_and_flags() {
        let p = ModelParams::<f64>::new(3, 0.7, 0.6).unwrap();
        assert!((p.s_c() - (1.5 - 0.7 / 0.6)).abs() < 1e-15);
        assert!(p.is_mass_supercritical() && p.sigma_leq_s() && !p.is_mass_critical());

        let c = ModelParams::<f64>::mass_critical(3, 0.75).unwrap();
        assert_eq!(c.sigma(), 0.5);
        assert!(c.is_mass_critical() && c.s_c().abs() < 1e-15);

        let sub = ModelParams::new(3, 0.7, 0.2).unwrap();
        assert!(sub.is_mass_subcritical());
    }

    #[test]
    fn energy_subcritical_admissibility() {
        // 2s/(N-2s) = 1.4/1.6 = 0.875
        assert!(ModelParams::new(3, 0.7, 0.87).is_ok());
        assert!(ModelParams::new(3, 0.7, 0.875).is_err());
        // N <= 2s: every sigma admissible
        assert!(ModelParams::new(1, 0.5, 5.0).is_ok());
        assert!(ModelParams::new(3, 1.0, 0.5).is_err());
        assert!(ModelParams::new(3, 0.5, 0.0).is_err());
    }
}
