use std::f64::consts::PI;
use std::sync::Arc;

use fracnls::evolution::{evolve, strang_step, Controller, Propagator, SimulationState, StopReason};
use fracnls::spectral::{energy, mass};
use fracnls::{Field, Grid, ModelParams};
use num_complex::Complex;

fn gaussian(grid: &Arc<Grid<f64>>, amp: f64) -> Field<f64> {
    Field::from_real_fn(grid, |x| amp * (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp())
}

fn fixed(dt0: f64, t_end: f64) -> Controller {
    Controller {
        dt0,
        t_end,
        sample_interval: 0.0,
        fd_delta: None,
        adaptive: false,
        boundary_threshold: 1.0,
        ..Controller::default()
    }
}

#[test]
fn plane_wave_orbit_is_reproduced() {
    let grid = Grid::<f64>::new(&[16, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
    let params = ModelParams::new(2, 0.7, 0.6).unwrap();
    let (a, k) = (0.8, [2.0, 1.0]);
    let u0 = Field::from_fn(&grid, |x| Complex::from_polar(a, k[0] * x[0] + k[1] * x[1]));
    let mut prop = Propagator::new(&params, &grid).unwrap();
    let out =
        evolve(&mut prop, SimulationState::new(u0, &params, 1e-3).unwrap(), &fixed(1e-3, 1.0), |_| Ok(())).unwrap();
    assert_eq!(out.state.t, 1.0);
    let omega = 5f64.powf(0.7) - a.powf(1.2);
    let exact = Field::from_fn(&grid, |x| Complex::from_polar(a, k[0] * x[0] + k[1] * x[1] - omega));
    let err = out.state.u.values().iter().zip(exact.values()).map(|(u, e)| (u / e).arg().abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn zero_field_stays_zero() {
    let grid = Grid::<f64>::cubic(2, 8, 4.0).unwrap();
    let params = ModelParams::new(2, 0.6, 0.4).unwrap();
    let mut prop = Propagator::new(&params, &grid).unwrap();
    let st = SimulationState::new(Field::zeros(&grid), &params, 0.1).unwrap();
    let next = strang_step(&mut prop, &st, 0.1).unwrap();
    assert!(next.u.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn linear_flow_is_exact_for_any_step() {
    let grid = Grid::<f64>::new(&[32], &[2.0 * PI]).unwrap();
    let params = ModelParams::new(1, 0.5, 1.0).unwrap();
    let u0 = Field::from_fn(&grid, |x| Complex::new((3.0 * x[0]).cos(), (5.0 * x[0]).sin()));
    let mut prop = Propagator::new(&params, &grid).unwrap().linear();
    let st = SimulationState::new(u0, &params, 0.7).unwrap();
    let big = strang_step(&mut prop, &st, 0.7).unwrap();
    // (-Delta)^{1/2} acts as |k|
    let exact = Field::from_fn(&grid, |x| {
        let c: Complex<f64> =
            0.5 * (Complex::from_polar(1.0, 3.0 * x[0] - 2.1) + Complex::from_polar(1.0, -3.0 * x[0] - 2.1));
        let s: Complex<f64> = (Complex::from_polar(1.0, 5.0 * x[0] - 3.5)
            - Complex::from_polar(1.0, -5.0 * x[0] - 3.5))
            / Complex::new(0.0, 2.0);
        c + Complex::<f64>::i() * s
    });
    assert!(big.u.l2_distance(&exact).unwrap() < 1e-12);
}

fn smooth_run(dt: f64, dealias: bool) -> (f64, f64) {
    let grid = Grid::<f64>::cubic(2, 48, 24.0).unwrap();
    let params = ModelParams::new(2, 0.7, 0.6).unwrap();
    let u0 = gaussian(&grid, 1.2);
    let mut prop = Propagator::new(&params, &grid).unwrap();
    if dealias {
        prop = prop.with_dealiasing();
    }
    let st = SimulationState::new(u0, &params, dt).unwrap();
    let e0 = st.energy0;
    let mut worst = 0.0f64;
    let c = Controller { sample_interval: 0.05, ..fixed(dt, 0.5) };
    let out = evolve(&mut prop, st, &c, |smp| {
        worst = worst.max((energy(&smp.center.u, &params) - e0).abs());
        Ok(())
    })
    .unwrap();
    (worst, out.max_mass_drift)
}

#[test]
fn energy_error_is_second_order_and_mass_is_conserved() {
    let (e1, m1) = smooth_run(0.01, false);
    let (e2, m2) = smooth_run(0.005, false);
    let ratio = e1 / e2;
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio} ({e1:e}, {e2:e})");
    assert!(m1 < 1e-10 && m2 < 1e-10, "{m1:e} {m2:e}");
}

#[test]
fn dealiasing_mask_only_removes_mass() {
    let (_, drift) = smooth_run(0.01, true);
    assert!(drift > 0.0 && drift < 1e-5, "{drift:e}");
}

#[test]
fn reversibility_and_symmetry() {
    let grid = Grid::<f64>::new(&[24, 24, 32], &[16.0, 16.0, 20.0]).unwrap();
    let params = ModelParams::new(3, 0.7, 0.6).unwrap();
    let u0 = Field::from_fn(&grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        Complex::from_polar(1.5 * (-(r2 + 0.5 * x[2] * x[2]) / 2.0).exp(), 0.3 * x[2])
    });
    assert!(u0.y_symmetry_deviation() < 1e-15);
    let mut prop = Propagator::new(&params, &grid).unwrap();
    let st = SimulationState::new(u0.clone(), &params, 1e-2).unwrap();
    let mut cur = st.clone();
    for _ in 0..20 {
        cur = strang_step(&mut prop, &cur, 1e-2).unwrap();
    }
    assert!(cur.u.y_symmetry_deviation() < 1e-11);
    assert!((mass(&cur.u) - st.mass0).abs() / st.mass0 < 1e-12);
    for _ in 0..20 {
        cur = strang_step(&mut prop, &cur, -1e-2).unwrap();
    }
    let back = cur.u.l2_distance(&u0).unwrap();
    assert!(back < 1e-11, "{back:e}");
}

#[test]
fn small_gaussian_disperses_without_detection() {
    let grid = Grid::<f64>::cubic(3, 64, 80.0).unwrap();
    let params = ModelParams::new(3, 0.7, 0.6).unwrap();
    let u0 = Field::from_real_fn(&grid, |x| 0.3 * (-x.iter().map(|v| v * v).sum::<f64>() / 8.0).exp());
    assert!(energy(&u0, &params) > 0.0);
    let mut prop = Propagator::new(&params, &grid).unwrap();
    let c = Controller {
        dt0: 1e-2,
        t_end: 5.0,
        sample_interval: 0.5,
        fd_delta: None,
        boundary_threshold: 1e-3,
        ..Controller::default()
    };
    let out = evolve(&mut prop, SimulationState::new(u0, &params, 1e-2).unwrap(), &c, |_| Ok(())).unwrap();
    assert_eq!(out.verdict.reason, StopReason::Completed);
    assert!(!out.verdict.detected);
}

#[test]
fn centred_samples_land_on_exact_times() {
    let grid = Grid::<f64>::cubic(1, 64, 20.0).unwrap();
    let params = ModelParams::new(1, 0.7, 1.0).unwrap();
    let mut prop = Propagator::new(&params, &grid).unwrap();
    let c = Controller {
        dt0: 3e-3,
        t_end: 0.1,
        sample_interval: 0.025,
        fd_delta: Some(1e-3),
        adaptive: false,
        boundary_threshold: 1.0,
        ..Controller::default()
    };
    let mut seen = vec![];
    let out = evolve(&mut prop, SimulationState::new(gaussian(&grid, 1.0), &params, 3e-3).unwrap(), &c, |smp| {
        assert!(smp.minus.is_some() && smp.plus.is_some());
        seen.push(smp.center.t);
        Ok(())
    })
    .unwrap();
    let expect = [0.0, 0.025, 0.05, 0.075, 0.1];
    assert_eq!(seen.len(), expect.len());
    assert!(seen.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
    assert_eq!(out.state.t, 0.1);
}
