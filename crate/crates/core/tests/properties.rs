use std::sync::Arc;

use fracnls::corpus::{self, RandomSpec};
use fracnls::cutoff::{CutoffProfile, CylWeight};
use fracnls::evolution::Propagator;
use fracnls::quadrature::{ResolventQuadrature, DEFAULT_NODES, GATE_TOLERANCE};
use fracnls::virial::{rhs_integrals, virial_phi, Variant};
use fracnls::{spectral, Field, Grid, ModelParams};
use proptest::prelude::*;

fn random_field(n: usize, length: f64, seed: u64) -> Field<f64> {
    let g = Grid::<f64>::cubic(3, n, length).unwrap();
    corpus::random_cylindrical(&g, &RandomSpec::for_grid(&g), seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plancherel(seed in 0u64..10_000, length in 8.0f64..30.0) {
        let u = random_field(16, length, seed);
        let a = spectral::mass(&u);
        let b = spectral::mass_spectral(&u);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn fractional_powers_compose(seed in 0u64..10_000, p in 0.05f64..0.6, q in 0.05f64..0.6) {
        let u = random_field(16, 12.0, seed);
        let two = spectral::fractional_power(&spectral::fractional_power(&u, p).unwrap(), q).unwrap();
        let one = spectral::fractional_power(&u, p + q).unwrap();
        let scale = spectral::mass(&one).sqrt();
        prop_assert!(two.l2_distance(&one).unwrap() <= 1e-11 * scale);
    }

    #[test]
    fn seminorm_dilation_law(seed in 0u64..10_000, lambda in 0.3f64..3.0, s in 0.3f64..0.95) {
        // identical samples on a box shrunk by lambda: k -> lambda k, dx -> dx / lambda^N
        let u = random_field(16, 12.0, seed);
        let shrunk = Grid::<f64>::cubic(3, 16, 12.0 / lambda).unwrap();
        let v = Field::from_values(&shrunk, u.values().to_vec()).unwrap();
        let expected = spectral::sobolev_seminorm_sq(&u, s) * lambda.powf(2.0 * s - 3.0);
        let got = spectral::sobolev_seminorm_sq(&v, s);
        prop_assert!((got - expected).abs() <= 1e-11 * expected);
    }

    #[test]
    fn resolvent_gate_holds(s in 0.51f64..0.99, log_a in -1.38f64..4.15) {
        let q = ResolventQuadrature::new(s, 1.0, DEFAULT_NODES).unwrap();
        prop_assert!(q.beta_error(log_a.exp()) < GATE_TOLERANCE);
    }

    #[test]
    fn strang_step_keeps_y_symmetry_and_mass(seed in 0u64..10_000, dt in 1e-3f64..2e-2) {
        let u = random_field(16, 16.0, seed);
        let params = ModelParams::new(3, 0.7, 0.6).unwrap();
        let mut prop = Propagator::new(&params, u.grid()).unwrap();
        let mut v = u.values().to_vec();
        for _ in 0..5 {
            prop.step(&mut v, dt).unwrap();
        }
        let w = Field::from_values(u.grid(), v).unwrap();
        prop_assert!(w.y_symmetry_deviation() < 1e-12);
        let m0 = spectral::mass(&u);
        prop_assert!((spectral::mass(&w) - m0).abs() < 1e-12 * m0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kinetic_term_bounded_and_cross_term_nonpositive(seed in 0u64..10_000, radius in 0.5f64..3.0) {
        let u = random_field(24, 18.0, seed);
        let params = ModelParams::new(3, 0.7, 0.6).unwrap();
        let w = CylWeight::new(Arc::new(CutoffProfile::new()), radius, 3).unwrap();
        let quad = ResolventQuadrature::for_field(0.7, &u, DEFAULT_NODES).unwrap();
        let ints = rhs_integrals(&u, &w, &quad, &params).unwrap();
        for variant in [Variant::Phi, Variant::Psi] {
            let t = ints.terms(variant);
            prop_assert!(t.cross <= 0.0);
            prop_assert!(t.kinetic <= t.kinetic_bound + 1e-6 * t.scale());
        }
    }
}

#[test]
fn single_precision_smoke() {
    let g = Grid::<f32>::cubic(3, 16, 16.0).unwrap();
    let u = corpus::gaussian(&g, 1.0, 1.5, 1.5);
    let params = ModelParams::<f32>::new(3, 0.7, 0.6).unwrap();
    let mut prop = Propagator::new(&params, &g).unwrap();
    let mut v = u.values().to_vec();
    for _ in 0..20 {
        prop.step(&mut v, 1e-2).unwrap();
    }
    let w = Field::from_values(&g, v).unwrap();
    let m0 = spectral::mass(&u);
    assert!((spectral::mass(&w) - m0).abs() < 1e-4 * m0);
    let weight = CylWeight::new(Arc::new(CutoffProfile::new()), 2.0, 3).unwrap();
    assert!(virial_phi(&w, &weight).unwrap().is_finite());
    let u64 = corpus::gaussian(&Grid::<f64>::cubic(3, 16, 16.0).unwrap(), 1.0, 1.5, 1.5);
    let e32 = spectral::energy(&u, &params) as f64;
    let e64 = spectral::energy(&u64, &ModelParams::new(3, 0.7, 0.6).unwrap());
    assert!((e32 - e64).abs() < 1e-4 * e64.abs());
}
