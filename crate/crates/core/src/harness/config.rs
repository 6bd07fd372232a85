//! Experiment configuration: a TOML file with exactly the experiment fields
//! (unknown keys rejected), plus `--set key=value` overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    CsiLocalization,
    CsiWind,
    CsiSources,
    Tas,
    Composite,
}

impl Task {
    pub fn is_csi(self) -> bool {
        matches!(
            self,
            Task::CsiLocalization | Task::CsiWind | Task::CsiSources
        )
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csi-localization" => Ok(Task::CsiLocalization),
            "csi-wind" => Ok(Task::CsiWind),
            "csi-sources" => Ok(Task::CsiSources),
            "tas" => Ok(Task::Tas),
            "composite" => Ok(Task::Composite),
            other => Err(Error::Config(format!("unknown task '{other}'"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::CsiLocalization => "csi-localization",
            Task::CsiWind => "csi-wind",
            Task::CsiSources => "csi-sources",
            Task::Tas => "tas",
            Task::Composite => "composite",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// The full curiosity-weighted rule (composite: all three terms).
    Aif,
    Random,
    Greedy,
    Eig,
    /// Composite ablation: utility + response IG, no outcome-model MI.
    GPlusGig,
    /// Composite ablation: expected utility only (beta = gamma = 0).
    GOnly,
}

impl Strategy {
    pub fn valid_for(self, task: Task) -> bool {
        match task {
            Task::Composite => matches!(
                self,
                Strategy::Aif | Strategy::Random | Strategy::GPlusGig | Strategy::GOnly
            ),
            _ => matches!(
                self,
                Strategy::Aif | Strategy::Random | Strategy::Greedy | Strategy::Eig
            ),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            // "full" is the composite name for the complete rule.
            "aif" | "full" => Ok(Strategy::Aif),
            "random" => Ok(Strategy::Random),
            "greedy" => Ok(Strategy::Greedy),
            "eig" => Ok(Strategy::Eig),
            "g+gIG" => Ok(Strategy::GPlusGig),
            "g-only" => Ok(Strategy::GOnly),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Aif => "aif",
            Strategy::Random => "random",
            Strategy::Greedy => "greedy",
            Strategy::Eig => "eig",
            Strategy::GPlusGig => "g+gIG",
            Strategy::GOnly => "g-only",
        };
        f.write_str(s)
    }
}

/// Optional environment and surrogate overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvOverrides {
    pub y_max: Option<f64>,
    pub dt: Option<f64>,
    pub candidate_stride: Option<f64>,
    pub target_threshold: Option<f64>,
    pub param_delta: Option<f64>,
    pub n_candidates: Option<usize>,
    pub n_pairs: Option<usize>,
    pub probes_per_dim: Option<usize>,
    pub gp_lengthscale: Option<f64>,
    pub gp_signal_var: Option<f64>,
    pub gp_noise_var: Option<f64>,
    /// Refit lengthscales by marginal-likelihood grid search every this many
    /// iterations; 0 or absent disables refinement.
    pub gp_refine_every: Option<usize>,
    pub pref_lengthscale: Option<f64>,
    pub pref_signal_var: Option<f64>,
    pub dm_deterministic: Option<bool>,
    /// Probit scale of the simulated decision-maker on its raw utility
    /// differences; defaults to the model's lambda.
    pub dm_lambda: Option<f64>,
    /// Composite objective: "vehicle" (5d-3d) or "grid" (40d-4d).
    pub mo_kind: Option<String>,
}

/// The raw config file shape; values absent here fall back to per-task
/// defaults during [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    task: String,
    strategy: String,
    beta: Option<f64>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    delta: Option<f64>,
    n_mc: Option<usize>,
    budget: usize,
    seeds: Vec<u64>,
    output: String,
    #[serde(default)]
    environment: EnvOverrides,
}

/// A fully resolved, validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub strategy: Strategy,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub n_mc: usize,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub environment: EnvOverrides,
    /// Fingerprint of the canonical configuration text.
    pub config_hash: u64,
}

fn default_beta(task: Task) -> f64 {
    match task {
        Task::CsiLocalization => 0.5,
        Task::CsiWind => 1.0,
        Task::CsiSources => 5.0,
        Task::Tas => 20.0,
        Task::Composite => 1.0,
    }
}

impl ExperimentConfig {
    /// Parses config text, applies `--set` overrides (dotted keys address the
    /// environment table), resolves per-task defaults, and validates.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let canonical = toml::to_string(&table)
            .map_err(|e| Error::Config(format!("config serialize error: {e}")))?;
        let file: ConfigFile = toml::from_str(&canonical)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        Self::resolve(file, crate::util::fnv1a64(canonical.as_bytes()))
    }

    pub fn from_path(path: &std::path::Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        Self::from_toml_str(&text, overrides)
    }

    fn resolve(file: ConfigFile, config_hash: u64) -> Result<Self> {
        let task: Task = file.task.parse()?;
        let strategy: Strategy = file.strategy.parse()?;
        if !strategy.valid_for(task) {
            return Err(Error::Config(format!(
                "strategy '{}' is not valid for task '{}'",
                file.strategy, task
            )));
        }
        if file.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if file.seeds.is_empty() {
            return Err(Error::Config("at least one seed required".into()));
        }
        let beta = file.beta.unwrap_or_else(|| default_beta(task));
        let gamma = file
            .gamma
            .unwrap_or(if task == Task::Composite { 1.0 } else { 0.0 });
        if beta < 0.0 || gamma < 0.0 {
            return Err(Error::Config("beta and gamma must be nonnegative".into()));
        }
        let lambda = file.lambda.unwrap_or(0.1);
        if !(lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        let delta = file.delta.unwrap_or(0.02);
        if !(delta > 0.0) {
            return Err(Error::Config("delta must be positive".into()));
        }
        let n_mc = file
            .n_mc
            .unwrap_or(match task {
                Task::Tas => 64,
                Task::Composite => 32,
                _ => 1,
            });
        if n_mc == 0 {
            return Err(Error::Config("n_mc must be at least 1".into()));
        }
        Ok(Self {
            task,
            strategy,
            beta,
            gamma,
            lambda,
            delta,
            n_mc,
            budget: file.budget,
            seeds: file.seeds,
            output: PathBuf::from(file.output),
            environment: file.environment,
            config_hash,
        })
    }

    /// Shifts every seed by `offset`.
    pub fn offset_seeds(&mut self, offset: u64) {
        for s in &mut self.seeds {
            *s = s.wrapping_add(offset);
        }
    }
}

/// Applies one `key=value` override into the parsed table. Dotted keys
/// descend into sub-tables; values are parsed as TOML literals with a string
/// fallback.
fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), parsed);
            return Ok(());
        }
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override key '{key}' crosses a non-table")))?;
    }
    Err(Error::Config(format!("empty override key '{key}'")))
}
