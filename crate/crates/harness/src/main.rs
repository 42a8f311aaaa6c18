use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracnls_harness::config::ScenarioConfig;
use fracnls_harness::error::{HarnessError, Result};
use fracnls_harness::io::{write_json, Snapshot};
use fracnls_harness::scenario::{prepare, run_scenario, solve_ground_state, virial_check, GroundStateRecord};
use fracnls_harness::sweep::{run_sweep, SweepConfig};
use fracnls_harness::verify::{run_suite, VerifyOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fracnls",
    version,
    about = "Focusing fractional NLS lab: ground states, blow-up runs, virial diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario (or sweep) configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "FRACNLS_OUT", default_value = "fracnls-out")]
    out: PathBuf,

    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state Q of the configured equation.
    GroundState,
    /// Run a scenario and write its output bundle.
    Evolve,
    /// Check the virial identity at t = 0 for both weights.
    VirialCheck,
    /// Run the inequality suite.
    Verify {
        #[arg(long, default_value_t = 0.7)]
        s: f64,
        #[arg(long, default_value_t = 0.6)]
        sigma: f64,
    },
    /// Evaluate which blow-up hypotheses the initial data meets.
    Criteria,
    /// Run a parameter sweep.
    Sweep,
}

fn scenario(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli.config.as_ref().ok_or_else(|| HarnessError::Config("--config is required".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit<T: Serialize>(out: &Path, file: &str, value: &T) -> Result<()> {
    write_json(&out.join(file), value)?;
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct GroundStateReport {
    #[serde(flatten)]
    record: GroundStateRecord,
    s_c: f64,
    /// Threshold products `E[Q]^{s_c} M[Q]^{s-s_c}` and
    /// `||(-Delta)^{s/2}Q||^2 ||Q||^{s-s_c}`, defined when `0 < s_c < s`.
    energy_product: Option<f64>,
    gradient_product: Option<f64>,
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::GroundState => {
            let cfg = scenario(cli)?;
            cfg.validate_model()?;
            let params = cfg.model_params()?;
            let grid = cfg.build_grid()?;
            let q = solve_ground_state(&cfg, &params, &grid)?;
            Snapshot::from_field(&q.q, &params, 0.0).write(&cli.out.join("ground_state.snap"))?;
            let thresholds = q.thresholds(&params).ok();
            let report = GroundStateReport {
                record: GroundStateRecord::from_result(&q),
                s_c: params.s_c(),
                energy_product: thresholds.as_ref().and_then(|t| t.energy_product),
                gradient_product: thresholds.as_ref().and_then(|t| t.gradient_product),
            };
            emit(&cli.out, "ground_state.json", &report)?;
            Ok(0)
        }
        Command::Evolve => {
            let cfg = scenario(cli)?;
            let outcome = run_scenario(&cfg, &cli.out)?;
            let d = &outcome.summary.detection;
            println!(
                "{}: {} at t = {} after {} steps (max G/G0 = {:.3}, branch {})",
                cfg.name,
                outcome.status.as_str(),
                d.t_final,
                d.steps,
                d.max_ratio,
                outcome.summary.criteria.branch.map_or("none", |b| b.as_str())
            );
            Ok(outcome.status.exit_code())
        }
        Command::VirialCheck => {
            let cfg = scenario(cli)?;
            emit(&cli.out, "virial_check.json", &virial_check(&cfg)?)?;
            Ok(0)
        }
        Command::Verify { s, sigma } => {
            let report = run_suite(&VerifyOptions { s: *s, sigma: *sigma })?;
            emit(&cli.out, "verify.json", &report)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Criteria => {
            let cfg = scenario(cli)?;
            emit(&cli.out, "criteria.json", &prepare(&cfg)?.verdict)?;
            Ok(0)
        }
        Command::Sweep => {
            let path = cli.config.as_ref().ok_or_else(|| HarnessError::Config("--config is required".into()))?;
            let mut cfg = SweepConfig::load(path)?;
            if let Some(seed) = cli.seed {
                cfg.template.seed = seed;
            }
            let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = run_sweep(&cfg, &cli.out, threads)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            println!("{} cells, {failed} failed; table in {}", rows.len(), cli.out.join("sweep.csv").display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
