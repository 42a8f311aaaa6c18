mod common;

use common::{config, gaussian_toml};
use fracnls_harness::config::{InitialCondition, PerAxis, SymmetryClass};
use fracnls_harness::{HarnessError, ScenarioConfig};

fn is_config_error<T: std::fmt::Debug>(r: Result<T, HarnessError>) -> bool {
    matches!(r, Err(HarnessError::Config(_)))
}

#[test]
fn parses_with_defaults() {
    let cfg = config(&gaussian_toml(3, 16, 20.0, 0.7, 0.6, 1.0, ""));
    cfg.validate().unwrap();
    assert_eq!(cfg.symmetry_class, SymmetryClass::SigmaN);
    assert_eq!(cfg.quadrature.nodes, 64);
    assert_eq!(cfg.detection.ratio, 50.0);
    assert_eq!(cfg.detection.persistence, 10);
    assert_eq!(cfg.detection.min_dt, 1e-12);
    assert!(!cfg.numerics.dealias);
    assert!(cfg.time.adaptive);
    assert!(matches!(cfg.initial, InitialCondition::Gaussian { amplitude, .. } if amplitude == 1.0));
    assert_eq!(cfg.shape().unwrap(), vec![16; 3]);
}

#[test]
fn per_axis_grid_and_round_trip() {
    let text = gaussian_toml(3, 16, 16.0, 0.7, 0.6, 1.0, "")
        .replace("n = 16", "n = [16, 16, 24]")
        .replace("length = 16", "length = [16.0, 16.0, 24.0]");
    let cfg = config(&text);
    assert_eq!(cfg.grid.n, PerAxis::Each(vec![16, 16, 24]));
    assert_eq!(cfg.build_grid().unwrap().shape(), &[16, 16, 24]);
    let again = ScenarioConfig::from_toml_str(&cfg.to_toml().unwrap(), ".").unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn rejects_invalid_configurations() {
    let base = gaussian_toml(3, 16, 16.0, 0.7, 0.6, 1.0, "");
    // R must stay below min(L_y)/4
    assert!(is_config_error(config(&base.replace("radius = 3.0", "radius = 4.5")).validate()));
    assert!(is_config_error(config(&base.replace("n = 16", "n = 15")).validate()));
    // energy-supercritical power
    assert!(is_config_error(config(&base.replace("sigma = 0.6", "sigma = 5.0")).validate()));
    assert!(is_config_error(ScenarioConfig::from_toml_str(&format!("{base}\nbogus = 1\n"), ".")));
    assert!(is_config_error(config(&base.replace("dt0 = 1e-3", "dt0 = 0.0")).validate()));
}

#[test]
fn missing_snapshot_is_rejected() {
    let base = gaussian_toml(3, 16, 16.0, 0.7, 0.6, 1.0, "");
    let text = base.replace(
        "kind = \"gaussian\"\namplitude = 1\nwidth_y = 1.5\nwidth_n = 1.5",
        "kind = \"from-file\"\npath = \"does-not-exist.snap\"",
    );
    let cfg = config(&text);
    assert!(matches!(cfg.initial, InitialCondition::FromFile { .. }));
    assert!(is_config_error(cfg.validate()));
}

#[test]
fn sigma_n_requires_a_resolved_x_n_moment() {
    let wide = gaussian_toml(3, 16, 16.0, 0.7, 0.6, 1.0, "").replace("width_n = 1.5", "width_n = 4.0");
    assert!(is_config_error(config(&wide).validate()));
    // the same data without the moment requirement is accepted
    config(&wide.replace("\"Sigma_N\"", "\"Sigma\"")).validate().unwrap();
}
