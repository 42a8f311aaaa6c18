//! Scenario runner, hypothesis checks, parameter sweeps and file formats for
//! the `fracnls` lab.

pub mod config;
pub mod criteria;
pub mod error;
pub mod io;
pub mod scenario;
pub mod sweep;
pub mod verify;

pub use config::{ScenarioConfig, SymmetryClass};
pub use error::{HarnessError, Result};
pub use scenario::{run_scenario, Status};
