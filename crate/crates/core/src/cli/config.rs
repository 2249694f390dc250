// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment configuration. Every section is optional and falls back to
//! the documented defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::EnvironmentSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RangeSweep,
    TopologyReport,
    KinematicSearch,
    DynamicOptimize,
    Validate,
}

/// A temperature in units of `ω₀`; the string `"inf"` denotes `T = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Temperature(pub f64);

impl Serialize for Temperature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(Temperature(t)),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Temperature(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unrecognized temperature {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand.
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub range_sweep: RangeSweepConfig,
    pub topology_report: TopologyConfig,
    pub kinematic_search: KinematicConfig,
    pub dynamic_optimize: DynamicConfig,
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangeSweepConfig {
    pub populations: Vec<f64>,
    pub theta: Vec<f64>,
    pub environments: Vec<EnvironmentSpec>,
    pub temperatures: Vec<Temperature>,
}

impl Default for RangeSweepConfig {
    fn default() -> Self {
        let mut temperatures: Vec<Temperature> = (0..50).map(|k| Temperature(0.1 * k as f64)).collect();
        temperatures.push(Temperature(f64::INFINITY));
        Self {
            populations: vec![0.7, 0.3],
            theta: vec![0.5, -0.5],
            environments: vec![EnvironmentSpec::spin(2, 1.0)],
            temperatures,
        }
    }
}

/// Explicit table margins, bypassing the spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsConfig {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub populations: Vec<f64>,
    pub theta: Vec<f64>,
    /// Eigenvalues of the environment state; `[1, 0, …, 0]` is a pure state.
    pub env_populations: Vec<f64>,
    pub margins: Option<MarginsConfig>,
    pub include_tables: bool,
    pub table_cap: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            populations: vec![0.7, 0.3],
            theta: vec![0.5, -0.5],
            env_populations: vec![1.0, 0.0, 0.0, 0.0],
            margins: None,
            include_tables: false,
            table_cap: crate::topology::DEFAULT_TABLE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Ascend,
    Descend,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicConfig {
    pub populations: Vec<f64>,
    pub theta: Vec<f64>,
    pub env_populations: Vec<f64>,
    pub n_starts: usize,
    pub mode: SearchMode,
    pub max_iters: usize,
    /// Near an extremum `J` changes by about `‖G‖²`, so values much below
    /// 1e-7 sit under the round-off floor of the Armijo test.
    pub grad_tol: f64,
    /// Distance from the extremum still counted as reaching it.
    pub tolerance: f64,
    /// Start every search from a constructed optimum instead of Haar draws.
    pub start_from_optimum: bool,
}

impl Default for KinematicConfig {
    fn default() -> Self {
        Self {
            populations: vec![0.7, 0.3],
            theta: vec![0.5, -0.5],
            env_populations: vec![1.0, 0.0, 0.0, 0.0],
            n_starts: 20,
            mode: SearchMode::Ascend,
            max_iters: 2000,
            grad_tol: 1e-7,
            tolerance: 1e-6,
            start_from_optimum: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicConfig {
    pub omega0: f64,
    pub gamma: f64,
    pub environment: EnvironmentSpec,
    pub temperature: Temperature,
    pub populations: Vec<f64>,
    pub theta: Vec<f64>,
    pub t_final: f64,
    pub n_slices: usize,
    /// Half-width of the uniform distribution of initial amplitudes.
    pub initial_amplitude: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Also optimize the uncoupled model (`γ = 0`) from the same start.
    pub baseline: bool,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            gamma: 0.15,
            environment: EnvironmentSpec::spin(6, 1.2),
            temperature: Temperature(1.0),
            populations: vec![0.7, 0.3],
            theta: vec![0.5, -0.5],
            t_final: 20.0,
            n_slices: 200,
            initial_amplitude: 0.1,
            max_iters: 200,
            grad_tol: 1e-8,
            baseline: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Seeded trials per randomized invariant.
    pub trials: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { trials: 20 }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Range checks that serde cannot express.
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        let r = &self.range_sweep;
        if r.temperatures.is_empty() {
            return bad("range_sweep.temperatures must not be empty".into());
        }
        if r.temperatures.iter().any(|t| t.0.is_nan() || t.0 < 0.0) {
            return bad("temperatures must be non-negative".into());
        }
        if r.environments.is_empty() {
            return bad("range_sweep.environments must not be empty".into());
        }
        for env in &r.environments {
            env.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        check_populations("range_sweep.populations", &r.populations)?;
        check_populations("topology_report.env_populations", &self.topology_report.env_populations)?;
        check_populations("topology_report.populations", &self.topology_report.populations)?;
        if self.topology_report.table_cap == 0 {
            return bad("topology_report.table_cap must be positive".into());
        }
        let k = &self.kinematic_search;
        check_populations("kinematic_search.populations", &k.populations)?;
        check_populations("kinematic_search.env_populations", &k.env_populations)?;
        if k.n_starts == 0 {
            return bad("kinematic_search.n_starts must be at least 1".into());
        }
        if !(k.grad_tol > 0.0 && k.tolerance > 0.0) {
            return bad("kinematic_search tolerances must be positive".into());
        }
        let d = &self.dynamic_optimize;
        check_populations("dynamic_optimize.populations", &d.populations)?;
        d.environment.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if d.populations.len() != 2 || d.theta.len() != 2 {
            return bad("dynamic_optimize drives a two-level system".into());
        }
        if d.n_slices == 0 || !(d.t_final >= 0.0 && d.t_final.is_finite()) {
            return bad("dynamic_optimize needs n_slices >= 1 and a finite t_final >= 0".into());
        }
        if d.temperature.0.is_nan() || d.temperature.0 < 0.0 {
            return bad("dynamic_optimize.temperature must be non-negative".into());
        }
        if !(d.initial_amplitude >= 0.0 && d.initial_amplitude.is_finite()) {
            return bad("dynamic_optimize.initial_amplitude must be finite and non-negative".into());
        }
        Ok(())
    }
}

fn check_populations(name: &str, p: &[f64]) -> Result<(), ConfigError> {
    let sum: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&x| x.is_nan() || x < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(ConfigError::Invalid(format!("{name} must be non-negative and sum to 1, got {p:?}")));
    }
    Ok(())
}
