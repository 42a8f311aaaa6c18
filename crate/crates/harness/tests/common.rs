#![allow(dead_code)]

use fracnls_harness::ScenarioConfig;

/// Gaussian scenario on a small cube; `extra` is appended verbatim.
pub fn gaussian_toml(dim: usize, n: usize, length: f64, s: f64, sigma: f64, amplitude: f64, extra: &str) -> String {
    format!(
        r#"
name = "test"
symmetry_class = "Sigma_N"
seed = 3

[params]
dim = {dim}
s = {s}
sigma = {sigma}

[grid]
n = {n}
length = {length}

[initial]
kind = "gaussian"
amplitude = {amplitude}
width_y = 1.5
width_n = 1.5

[cutoff]
radius = 3.0

[time]
dt0 = 1e-3
t_end = 0.02
sample_interval = 0.01

[detection]
boundary_threshold = 1e-4
{extra}
"#
    )
}

pub fn config(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(text, ".").unwrap()
}
