use fracnls::ground_state::{gaussian_seed, petviashvili, PetviashviliOptions};
use fracnls::spectral::energy;
use fracnls::{corpus, Field64, Grid64, Params64};
use fracnls_harness::criteria::{check_criteria, Branch, Regime};
use fracnls_harness::{HarnessError, SymmetryClass};
use num_complex::Complex;

fn gaussian(dim: usize, n: usize, length: f64, amplitude: f64) -> Field64 {
    let g = Grid64::cubic(dim, n, length).unwrap();
    corpus::gaussian(&g, amplitude, 1.5, 1.5)
}

#[test]
fn mass_critical_power_gives_the_mass_critical_branch() {
    let params = Params64::mass_critical(3, 0.75).unwrap();
    let u = gaussian(3, 24, 16.0, 3.0);
    assert!(energy(&u, &params) < 0.0);
    let v = check_criteria(&u, &params, SymmetryClass::SigmaN, None).unwrap();
    assert_eq!(v.s_c, 0.0);
    assert_eq!(v.regime, Regime::MassCritical);
    assert_eq!(v.branch, Some(Branch::MassCritical));
    // positive energy: the regime stays, the branch goes
    let small = gaussian(3, 24, 16.0, 0.3);
    let v = check_criteria(&small, &params, SymmetryClass::SigmaN, None).unwrap();
    assert_eq!(v.regime, Regime::MassCritical);
    assert_eq!(v.branch, None);
    assert!(v.reason.unwrap().contains("E < 0"));
}

#[test]
fn negative_energy_supercritical_data() {
    let params = Params64::new(3, 0.7, 0.6).unwrap();
    let u = gaussian(3, 24, 16.0, 2.5);
    let v = check_criteria(&u, &params, SymmetryClass::SigmaN, None).unwrap();
    assert!(v.inputs.energy < 0.0);
    assert_eq!(v.branch, Some(Branch::NegativeEnergy));
    assert!(v.hypotheses.supercritical_sigma_n.satisfied);
    assert!(v.thresholds.is_none());
    // the same data declared only in Sigma fails the Sigma_N requirement
    let v = check_criteria(&u, &params, SymmetryClass::Sigma, None).unwrap();
    assert_eq!(v.branch, None);
    assert!(v.hypotheses.supercritical_sigma_n.unmet.contains(&"data in Sigma_N".to_string()));
}

#[test]
fn sigma_class_in_four_dimensions() {
    // 2s/(N-1) = 0.533 < sigma = 0.6 <= s = 0.8
    let params = Params64::new(4, 0.8, 0.6).unwrap();
    let u = gaussian(4, 12, 12.0, 3.0);
    let v = check_criteria(&u, &params, SymmetryClass::Sigma, None).unwrap();
    assert!(v.inputs.energy < 0.0);
    assert_eq!(v.branch, Some(Branch::SigmaClass));
    // Sigma_N data meets both supercritical sets; the Sigma_N branch is designated
    let v = check_criteria(&u, &params, SymmetryClass::SigmaN, None).unwrap();
    assert!(v.hypotheses.supercritical_sigma.satisfied);
    assert_eq!(v.branch, Some(Branch::NegativeEnergy));
}

#[test]
fn scaled_ground_state_meets_the_gradient_condition() {
    let params = Params64::new(3, 0.7, 0.6).unwrap();
    let g = Grid64::cubic(3, 32, 24.0).unwrap();
    let q = petviashvili(&params, &gaussian_seed(&g), &PetviashviliOptions::default()).unwrap();
    let u = q.q.scaled(1.1);
    assert!(energy(&u, &params) >= 0.0);
    assert!(
        matches!(check_criteria(&u, &params, SymmetryClass::SigmaN, None), Err(HarnessError::Config(m)) if m.contains("ground state"))
    );
    let v = check_criteria(&u, &params, SymmetryClass::SigmaN, Some(&q)).unwrap();
    let t = v.thresholds.unwrap();
    assert!(t.gradient_condition, "{t:?}");
    // 1.1^{2 + s - s_c} for the gradient product
    let expect = 1.1f64.powf(2.0 + 0.7 - v.s_c);
    assert!((t.gradient_lhs / t.gradient_rhs - expect).abs() < 1e-9);
    // the energy condition is evaluated from the same numbers
    assert!(t.energy_lhs.is_finite() && t.energy_rhs > 0.0);
    assert_eq!(t.energy_condition, t.energy_lhs < t.energy_rhs * (1.0 - 1e-8));
}

#[test]
fn asymmetric_data_is_rejected() {
    let params = Params64::new(3, 0.7, 0.6).unwrap();
    let g = Grid64::cubic(3, 16, 16.0).unwrap();
    let u = Field64::from_fn(&g, |x| Complex::new((-(x[0] - 1.0).powi(2) - x[1] * x[1] - x[2] * x[2]).exp(), 0.0));
    assert!(matches!(check_criteria(&u, &params, SymmetryClass::SigmaN, None), Err(HarnessError::Config(_))));
}
