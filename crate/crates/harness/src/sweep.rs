//! Parameter sweeps over amplitude, `sigma`, `s` and `R`.
//!
//! A sweep file is a scenario configuration (the template) plus a `[sweep]`
//! table:
//!
//! ```toml
//! [sweep]
//! amplitude = [0.5, 1.0, 1.5]
//! sigma = [0.5, 0.6]
//! max_cells = 64
//! ```
//!
//! Each cell runs in `cells/cell-NNNN/` and finishes by writing `row.json`.
//! Cells with a `row.json` are skipped on a rerun, so an interrupted sweep
//! resumes where it stopped. The merge into `sweep.csv` reads the per-cell
//! rows in index order on one thread.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{InitialCondition, ScenarioConfig};
use crate::error::{HarnessError, Result, EXIT_CONFIG};
use crate::io::{fmt_f64, render_csv, write_atomic, write_json};
use crate::scenario::run_scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub amplitude: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default)]
    pub radius: Vec<f64>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_max_cells() -> usize {
    256
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self { amplitude: vec![], sigma: vec![], s: vec![], radius: vec![], max_cells: default_max_cells() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub amplitude: Option<f64>,
    pub sigma: Option<f64>,
    pub s: Option<f64>,
    pub radius: Option<f64>,
}

impl SweepAxes {
    /// Cartesian product in the order amplitude, sigma, s, radius (radius
    /// fastest). An empty axis keeps the template value.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let axis = |v: &Vec<f64>| if v.is_empty() { vec![None] } else { v.iter().map(|&x| Some(x)).collect() };
        let (a, g, s, r) = (axis(&self.amplitude), axis(&self.sigma), axis(&self.s), axis(&self.radius));
        let total = a.len() * g.len() * s.len() * r.len();
        if total > self.max_cells {
            return Err(HarnessError::Config(format!("sweep has {total} cells, above max_cells = {}", self.max_cells)));
        }
        let mut out = Vec::with_capacity(total);
        for &amplitude in &a {
            for &sigma in &g {
                for &s in &s {
                    for &radius in &r {
                        out.push(Cell { index: out.len(), amplitude, sigma, s, radius });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub template: ScenarioConfig,
    pub axes: SweepAxes,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let cfg_err = |e: toml::de::Error| HarnessError::Config(e.to_string());
        let mut table: toml::Table = text.parse().map_err(cfg_err)?;
        let axes = match table.remove("sweep") {
            Some(v) => v.try_into().map_err(cfg_err)?,
            None => SweepAxes::default(),
        };
        let mut template: ScenarioConfig = toml::Value::Table(table).try_into().map_err(cfg_err)?;
        template.base_dir = base_dir.into();
        Ok(Self { template, axes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }
}

/// The template with one cell's overrides applied.
pub fn apply(template: &ScenarioConfig, cell: &Cell) -> Result<ScenarioConfig> {
    let mut cfg = template.clone();
    cfg.name = format!("{}-cell{:04}", template.name, cell.index);
    if let Some(a) = cell.amplitude {
        match &mut cfg.initial {
            InitialCondition::Gaussian { amplitude, .. } | InitialCondition::Ring { amplitude, .. } => *amplitude = a,
            InitialCondition::GroundStateMultiple { factor } => *factor = a,
            InitialCondition::FromFile { .. } => {
                return Err(HarnessError::Config("an amplitude axis needs a parametric initial condition".into()))
            }
        }
    }
    if let Some(v) = cell.sigma {
        cfg.params.sigma = v;
    }
    if let Some(v) = cell.s {
        cfg.params.s = v;
    }
    if let Some(v) = cell.radius {
        cfg.cutoff.radius = v;
    }
    Ok(cfg)
}

/// One line of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: Cell,
    /// A run status, or `config-error` / `error` when the cell did not run.
    pub status: String,
    pub exit_code: i32,
    pub s_c: Option<f64>,
    pub energy: Option<f64>,
    pub branch: Option<String>,
    pub detected: Option<bool>,
    pub reason: Option<String>,
    pub t_final: Option<f64>,
    pub max_ratio: Option<f64>,
    pub growth_exponent: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_COLUMNS: [&str; 16] = [
    "index",
    "amplitude",
    "sigma",
    "s",
    "radius",
    "status",
    "exit_code",
    "s_c",
    "energy",
    "branch",
    "detected",
    "reason",
    "t_final",
    "max_ratio",
    "growth_exponent",
    "error",
];

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        vec![
            self.cell.index.to_string(),
            f(self.cell.amplitude),
            f(self.cell.sigma),
            f(self.cell.s),
            f(self.cell.radius),
            self.status.clone(),
            self.exit_code.to_string(),
            f(self.s_c),
            f(self.energy),
            self.branch.clone().unwrap_or_default(),
            self.detected.map(|d| d.to_string()).unwrap_or_default(),
            self.reason.clone().unwrap_or_default(),
            f(self.t_final),
            f(self.max_ratio),
            f(self.growth_exponent),
            self.error.clone().unwrap_or_default(),
        ]
    }

    fn failed(cell: &Cell, err: &HarnessError) -> Self {
        let code = err.exit_code();
        SweepRow {
            cell: cell.clone(),
            status: if code == EXIT_CONFIG { "config-error".into() } else { "error".into() },
            exit_code: code,
            s_c: None,
            energy: None,
            branch: None,
            detected: None,
            reason: None,
            t_final: None,
            max_ratio: None,
            growth_exponent: None,
            error: Some(err.to_string()),
        }
    }
}

pub fn cell_dir(out: &Path, cell: &Cell) -> PathBuf {
    out.join("cells").join(format!("cell-{:04}", cell.index))
}

fn run_cell(template: &ScenarioConfig, cell: &Cell, out: &Path) -> Result<()> {
    let dir = cell_dir(out, cell);
    let row_path = dir.join("row.json");
    if row_path.is_file() {
        return Ok(());
    }
    let attempt = apply(template, cell).and_then(|cfg| {
        write_atomic(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
        run_scenario(&cfg, &dir)
    });
    let row = match attempt {
        Ok(o) => {
            let s = &o.summary;
            SweepRow {
                cell: cell.clone(),
                status: s.status.as_str().into(),
                exit_code: s.exit_code,
                s_c: Some(s.s_c),
                energy: Some(s.initial.energy),
                branch: s.criteria.branch.map(|b| b.as_str().to_string()),
                detected: Some(s.detection.detected),
                reason: Some(s.detection.reason.clone()),
                t_final: Some(s.detection.t_final),
                max_ratio: Some(s.detection.max_ratio),
                growth_exponent: s.growth_fit.as_ref().map(|g| g.exponent),
                error: s.error.clone(),
            }
        }
        Err(HarnessError::Io { path, source }) => return Err(HarnessError::Io { path, source }),
        Err(e) => SweepRow::failed(cell, &e),
    };
    write_json(&row_path, &row)
}

/// Runs every cell not yet finished on `threads` workers, then merges all
/// per-cell rows into `sweep.csv`.
pub fn run_sweep(cfg: &SweepConfig, out: &Path, threads: usize) -> Result<Vec<SweepRow>> {
    let cells = cfg.axes.cells()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {threads} workers: {e}")))?;
    pool.install(|| cells.par_iter().try_for_each(|c| run_cell(&cfg.template, c, out)))?;
    let rows = cells
        .iter()
        .map(|c| {
            let path = cell_dir(out, c).join("row.json");
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect::<Result<Vec<SweepRow>>>()?;
    write_atomic(&out.join("sweep.csv"), &render_csv(&SWEEP_COLUMNS, rows.iter().map(SweepRow::cells))?)?;
    Ok(rows)
}
