//! Experiment configuration: one JSON document per run, naming the command and holding its
//! parameter block. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use eulerlab::inflation::{InflationParams, PerturbationScanParams, SolverSettings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Write field or checkpoint files under `fields/`.
    #[serde(default)]
    pub write_fields: bool,
    /// Every experiment is deterministic; the flag is recorded for provenance only.
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(default)]
    pub params: serde_json::Value,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), output_dir: None, write_fields: false, deterministic: true, params: serde_json::Value::Null }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if !cfg.deterministic {
            return Err(CliError::Config("all experiments are deterministic; `deterministic` cannot be false".into()));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Parameter block decoded as `T`, defaults when absent.
    pub fn block<T: for<'de> Deserialize<'de> + Default>(&self) -> Result<T, CliError> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone())
            .map_err(|e| CliError::Config(format!("invalid `params` for `{}`: {e}", self.command)))
    }

    pub fn set_block<T: Serialize>(&mut self, block: &T) {
        self.params = serde_json::to_value(block).expect("parameter block serializes");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShearFlowConfig {
    pub alpha: f64,
    pub eps: f64,
    pub times: Vec<f64>,
    pub residual_samples: usize,
    pub seed: u64,
}

impl Default for ShearFlowConfig {
    fn default() -> Self {
        Self { alpha: 0.5, eps: 1e-3, times: vec![1e-3, 1e-2, 1e-1, 1.0], residual_samples: 1000, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// Two equal blobs at `(±d/2, 0)`.
    Pair,
    /// The multiscale odd-odd vorticity.
    Multiscale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSimConfig {
    pub initial: InitialData,
    pub separation: f64,
    pub circulation: f64,
    /// Blob radius for the pair.
    pub delta: f64,
    pub inflation: InflationParams,
    pub seeds_per_bump: usize,
    pub delta_factor: f64,
    pub dt: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub checkpoint_every: usize,
}

impl Default for FlowSimConfig {
    fn default() -> Self {
        Self {
            initial: InitialData::Pair,
            separation: 1.0,
            circulation: 1.0,
            delta: 0.05,
            inflation: InflationParams { n_scales: 4, ..InflationParams::default() },
            seeds_per_bump: 8,
            delta_factor: 2.0,
            dt: 1e-2,
            t_end: 1.0,
            cfl: 0.1,
            checkpoint_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InflateConfig {
    pub inflation: InflationParams,
    pub solver: SolverSettings,
}

impl Default for InflateConfig {
    fn default() -> Self {
        Self {
            inflation: InflationParams { n_scales: 16, ..InflationParams::default() },
            solver: SolverSettings { steps: 40, sample_every: 10, lattice_nodes: 65, ..SolverSettings::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeformScanConfig {
    pub inflation: InflationParams,
    pub solver: SolverSettings,
    pub scales: Vec<usize>,
}

impl Default for DeformScanConfig {
    fn default() -> Self {
        Self { inflation: InflationParams::default(), solver: SolverSettings::default(), scales: vec![4, 8, 16] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma51Config {
    pub m: f64,
    pub r: f64,
    pub q: f64,
    pub scales: Vec<usize>,
}

impl Default for Lemma51Config {
    fn default() -> Self {
        Self { m: 10.0, r: 2.5, q: 1.5, scales: vec![4, 8, 16, 32] }
    }
}

pub type Lemma53Config = PerturbationScanParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Sup,
    Lp,
    Sobolev,
    Besov,
    Holder,
    LittleHolder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub field: Option<PathBuf>,
    pub kind: NormKind,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub l_min: Option<i32>,
    pub l_max: Option<i32>,
    pub budget: usize,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { field: None, kind: NormKind::Besov, s: 1.0, p: 2.0, q: 2.0, alpha: 0.5, l_min: None, l_max: None, budget: 1 << 24 }
    }
}
