use std::sync::Arc;

use fracnls::corpus;
use fracnls::cutoff::CutoffProfile;
use fracnls::inequality::*;
use fracnls::{Field, Grid, ModelParams};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn gaussian_sobolev_ratio(g: &Arc<Grid<f64>>, lambda: f64) -> f64 {
    let f = Field::from_real_fn(g, |y| (-lambda * (y[0] * y[0] + y[1] * y[1])).exp());
    radial_sobolev_ratio(&f, 1.0 / lambda.sqrt(), 0.7).unwrap().ratio
}

#[test]
fn radial_sobolev_ratio_is_dilation_invariant() {
    // dilating the box with the profile makes the discrete problems exact
    // rescalings of each other, so only the exponents of both sides are tested
    let base = gaussian_sobolev_ratio(&Grid::<f64>::new(&[128, 128], &[20.0, 20.0]).unwrap(), 1.0);
    for lambda in [0.5f64, 2.0, 4.0] {
        let l = 20.0 / lambda.sqrt();
        let r = gaussian_sobolev_ratio(&Grid::<f64>::new(&[128, 128], &[l, l]).unwrap(), lambda);
        assert!(rel(r, base) < 1e-6, "lambda {lambda}: {r} vs {base}");
    }
}

#[test]
fn radial_sobolev_ratio_on_one_box_up_to_lattice_error() {
    // on a fixed torus the seminorm carries an O((2 pi / L)^{2 + 2s}) lattice error
    let g = Grid::<f64>::new(&[256, 256], &[50.0, 50.0]).unwrap();
    let base = gaussian_sobolev_ratio(&g, 1.0);
    for lambda in [0.5, 2.0, 4.0] {
        let r = gaussian_sobolev_ratio(&g, lambda);
        assert!(rel(r, base) < 1e-4, "lambda {lambda}: {r} vs {base}");
    }
}

#[test]
fn radial_sobolev_trivial_cases() {
    let g = Grid::<f64>::new(&[16, 16], &[8.0, 8.0]).unwrap();
    let zero = Field::zeros(&g);
    assert_eq!(radial_sobolev_ratio(&zero, 1.0, 0.7).unwrap().ratio, 0.0);
    assert!(radial_sobolev_ratio(&zero, 0.0, 0.7).is_err());
}

fn radial_bump(rng: &mut ChaCha8Rng) -> impl Fn(&[f64]) -> f64 {
    let terms: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.3..1.5), rng.gen_range(0.0..3.0))).collect();
    move |y: &[f64]| {
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        terms.iter().map(|&(c, a, r0)| c * (-a * (r - r0) * (r - r0)).exp()).sum()
    }
}

#[test]
fn radial_sobolev_supremum_is_grid_converged() {
    let probes = [0.5, 1.0, 2.0, 3.0];
    let sup_on = |n: usize| {
        let g = Grid::<f64>::new(&[n, n], &[24.0, 24.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sup = 0.0f64;
        for _ in 0..50 {
            let f = Field::from_real_fn(&g, radial_bump(&mut rng));
            for &p in &probes {
                let r = radial_sobolev_ratio(&f, p, 0.7).unwrap().ratio;
                assert!(r.is_finite());
                sup = sup.max(r);
            }
        }
        sup
    };
    let coarse = sup_on(64);
    let fine = sup_on(128);
    assert!(rel(coarse, fine) < 0.05, "{coarse} vs {fine}");
}

#[test]
fn gn_ratio_is_dilation_invariant() {
    // long box: the lattice error of the seminorm is O((2 pi / L)^{1 + 2s})
    let g = Grid::<f64>::new(&[1 << 17], &[4000.0]).unwrap();
    let ratio = |lambda: f64| {
        let f = Field::from_real_fn(&g, |x| (-lambda * x[0] * x[0]).exp());
        gn_ratio(&f, 4.0, 0.7).unwrap().ratio
    };
    let base = ratio(1.0);
    for lambda in [0.5, 2.0, 4.0] {
        assert!(rel(ratio(lambda), base) < 1e-6, "lambda {lambda}");
    }
    assert_eq!(gn_ratio(&Field::zeros(&g), 4.0, 0.7).unwrap().ratio, 0.0);
}

#[test]
fn gn_ratio_is_finite_on_random_band_limited_fields() {
    let g = Grid::<f64>::new(&[256], &[20.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ratios = Vec::new();
    for _ in 0..100 {
        let mut spec = vec![Complex::new(0.0, 0.0); 256];
        for k in (0..12).chain(256 - 11..256) {
            spec[k] = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let f = Field::with_representation(&g, spec, fracnls::Representation::Frequency).unwrap();
        let r = gn_ratio(&f.into_physical(), 4.0, 0.7).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        ratios.push(r.ratio);
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios[50];
    assert!(ratios[99] < 10.0 * median);
}

#[test]
fn pointwise_identity_gaussian() {
    let g = Grid::<f64>::new(&[512], &[40.0]).unwrap();
    let u = Field::from_real_fn(&g, |x| (-x[0] * x[0] / 2.0).exp());
    let rep = fid_identity_check(&u, 0.6).unwrap();
    assert!(rep.self_test_error < KERNEL_SELF_TEST_TOL);
    assert!(rep.residual < 1e-4 * rep.scale, "{} vs {}", rep.residual, rep.scale);
}

#[test]
fn pointwise_identity_sech() {
    let g = Grid::<f64>::new(&[1024], &[60.0]).unwrap();
    let u = Field::from_fn(&g, |x| Complex::from_polar(1.0 / x[0].cosh(), 0.3 * x[0]));
    let rep = fid_identity_check(&u, 0.5).unwrap();
    assert!(rep.residual < 1e-4 * rep.scale, "{} vs {}", rep.residual, rep.scale);
}

#[test]
fn pointwise_identity_constant_is_trivial() {
    let g = Grid::<f64>::new(&[64], &[10.0]).unwrap();
    let u = Field::from_real_fn(&g, |_| 0.8);
    let rep = fid_identity_check(&u, 0.6).unwrap();
    assert!(rep.scale < 1e-12 && rep.residual < 1e-12, "{rep:?}");
}

fn chain_grid() -> Arc<Grid<f64>> {
    Grid::<f64>::cubic(3, 48, 24.0).unwrap()
}

#[test]
fn chain_tail_vanishes_for_interior_support() {
    let g = chain_grid();
    let params = ModelParams::new(3, 0.7, 0.6).unwrap();
    let u = Field::from_real_fn(&g, |x| {
        let q = (x[0] * x[0] + x[1] * x[1]) / 4.0;
        let b = if q < 1.0 { (-1.0 / (1.0 - q)).exp() } else { 0.0 };
        b * (-x[2] * x[2] / 4.0).exp()
    });
    let rec = chain_ratios(&u, &params, 3.0).unwrap();
    assert_eq!(rec.tail.lhs, 0.0);
    assert_eq!(rec.tail.ratio, 0.0);
    assert_eq!(rec.exterior_sup.ratio, 0.0);
}

#[test]
fn chain_rejects_sigma_above_s() {
    let g = chain_grid();
    let params = ModelParams::new(3, 0.6, 0.65).unwrap();
    let u = corpus::gaussian(&g, 1.0, 2.0, 2.0);
    assert!(chain_ratios(&u, &params, 3.0).is_err());
}

#[test]
fn chain_links_and_doubling() {
    let g = chain_grid();
    let params = ModelParams::new(3, 0.7, 0.6).unwrap();
    let u = corpus::gaussian(&g, 1.0, 2.0, 2.0);
    let r2 = chain_ratios(&u, &params, 2.0).unwrap();
    let r4 = chain_ratios(&u, &params, 4.0).unwrap();
    for rec in [&r2, &r4] {
        // both splittings are exact Holder inequalities of the discrete sums
        assert!(rec.holder_split.ratio <= 1.0 + 1e-12);
        assert!(rec.exterior_sup.rhs <= rec.exterior_sup_holder.rhs * (1.0 + 1e-12));
    }
    assert!(tail_doubling_factor(&r2, &r4) <= 1.3);
}

#[test]
fn chain_ratios_are_finite_on_corpus() {
    let g = chain_grid();
    let params = ModelParams::new(3, 0.7, 0.6).unwrap();
    let fields = corpus::standard(&g, 20, 100);
    // R at the corpus length scale, so every field reaches the exterior
    let records: Vec<ChainRecord> = fields.iter().map(|f| chain_ratios(&f.field, &params, 1.0).unwrap()).collect();
    let links: [fn(&ChainRecord) -> &RatioSample; 4] =
        [|r| &r.exterior_sup, |r| &r.slab, |r| &r.tail, |r| &r.holder_split];
    for link in links {
        let mut ratios: Vec<f64> = records.iter().map(|r| link(r).ratio).collect();
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        ratios.sort_by(f64::total_cmp);
        let median = ratios[10];
        assert!(ratios[19] <= 10.0 * median, "{}: {ratios:?}", link(&records[0]).family);
    }
}

#[test]
fn hessian_formula_gaussian() {
    let g = Grid::<f64>::cubic(3, 32, 16.0).unwrap();
    let chk = hessian_formula_check(&g, |r| {
        let e = (-r * r / 2.0).exp();
        [e, -r * e, (r * r - 1.0) * e]
    })
    .unwrap();
    assert!(chk.residual < 1e-6 * chk.scale, "{chk:?}");
}

#[test]
fn hessian_formula_cutoff_profile() {
    let profile = CutoffProfile::new();
    let radius = 1.0;
    let psi = |r: f64| {
        let k = |o: usize| profile.eval_psi(r / radius, o).unwrap() * radius.powi(2 - o as i32);
        [k(0), k(1), k(2)]
    };
    for r in [0.1, 0.5, 0.99] {
        let [_, f1, f2] = psi(r);
        assert!((f1 / r - 1.0).abs() < 1e-12 && (f2 - 1.0).abs() < 1e-12);
    }
    let g = Grid::<f64>::new(&[128, 128], &[24.0, 24.0]).unwrap();
    let chk = hessian_formula_check(&g, psi).unwrap();
    assert!(chk.residual < 1e-5 * chk.scale, "{chk:?}");
}
