mod common;

use std::fs;

use common::{config, gaussian_toml};
use fracnls_harness::run_scenario;
use fracnls_harness::sweep::{apply, cell_dir, run_sweep, SweepAxes, SweepConfig};

fn sweep_toml(axes: &str, t_end: f64) -> String {
    gaussian_toml(3, 16, 20.0, 0.7, 0.6, 1.0, "").replace("t_end = 0.02", &format!("t_end = {t_end}"))
        + "\n[sweep]\n"
        + axes
}

#[test]
fn cells_follow_the_axis_order() {
    let axes = SweepAxes { amplitude: vec![1.0, 2.0], radius: vec![3.0, 4.0, 5.0], ..Default::default() };
    let cells = axes.cells().unwrap();
    assert_eq!(cells.len(), 6);
    assert_eq!(cells[1].radius, Some(4.0));
    assert_eq!(cells[3].amplitude, Some(2.0));
    assert!(cells.iter().all(|c| c.sigma.is_none() && c.s.is_none()));
    let capped = SweepAxes { max_cells: 5, ..axes };
    assert!(capped.cells().is_err());
    assert_eq!(SweepAxes::default().cells().unwrap().len(), 1);
}

#[test]
fn single_cell_matches_the_scenario_run() {
    let cfg = SweepConfig::from_toml_str(&sweep_toml("amplitude = [2.0]\n", 0.02), ".").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rows = run_sweep(&cfg, &dir.path().join("sweep"), 1).unwrap();
    assert_eq!(rows.len(), 1);
    let cell = &rows[0].cell;
    let direct = apply(&cfg.template, cell).unwrap();
    run_scenario(&direct, &dir.path().join("direct")).unwrap();
    let sweep_dir = cell_dir(&dir.path().join("sweep"), cell);
    for f in ["series.csv", "diagnostics.csv", "summary.json"] {
        assert_eq!(fs::read(sweep_dir.join(f)).unwrap(), fs::read(dir.path().join("direct").join(f)).unwrap(), "{f}");
    }
    let round: fracnls_harness::ScenarioConfig = config(&fs::read_to_string(sweep_dir.join("config.toml")).unwrap());
    assert_eq!(round.name, direct.name);
}

#[test]
fn resumed_sweep_equals_an_uninterrupted_one() {
    let cfg =
        SweepConfig::from_toml_str(&sweep_toml("amplitude = [1.0, 2.0]\nradius = [3.0, 4.0]\n", 0.01), ".").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    let rows = run_sweep(&cfg, &full, 3).unwrap();
    run_sweep(&cfg, &part, 2).unwrap();
    // simulate an interruption: two cells lost their completion marker
    let cells = cfg.axes.cells().unwrap();
    for c in &cells[1..3] {
        fs::remove_file(cell_dir(&part, c).join("row.json")).unwrap();
    }
    fs::remove_file(part.join("sweep.csv")).unwrap();
    let resumed = run_sweep(&cfg, &part, 2).unwrap();
    assert_eq!(resumed, rows);
    assert_eq!(fs::read(full.join("sweep.csv")).unwrap(), fs::read(part.join("sweep.csv")).unwrap());
}

#[test]
fn branch_follows_the_energy_sign_across_an_amplitude_sweep() {
    let amps = [0.2, 0.6, 1.0, 1.4, 1.8, 2.2, 2.6];
    let axes = format!("amplitude = {amps:?}\n");
    let cfg = SweepConfig::from_toml_str(&sweep_toml(&axes, 0.0), ".").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rows = run_sweep(&cfg, dir.path(), 4).unwrap();
    let energies: Vec<f64> = rows.iter().map(|r| r.energy.unwrap()).collect();
    assert!(energies[0] > 0.0 && energies[amps.len() - 1] < 0.0, "{energies:?}");
    for r in &rows {
        assert_eq!(r.status, "completed", "{r:?}");
        let e = r.energy.unwrap();
        if e < 0.0 {
            assert_eq!(r.branch.as_deref(), Some("negative-energy"));
        } else {
            assert_ne!(r.branch.as_deref(), Some("negative-energy"));
        }
    }
    // small data sits below the ground state in both products
    assert_eq!(rows[0].branch, None);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), amps.len() + 1);
}

#[test]
fn failing_cells_are_recorded() {
    // sigma = 3 is above the energy-critical power for N = 3, s = 0.7
    let cfg = SweepConfig::from_toml_str(&sweep_toml("sigma = [0.6, 3.0]\n", 0.0), ".").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rows = run_sweep(&cfg, dir.path(), 2).unwrap();
    assert_eq!(rows[0].status, "completed");
    assert_eq!(rows[1].status, "config-error");
    assert_eq!(rows[1].exit_code, 64);
    assert!(rows[1].error.is_some());
}
