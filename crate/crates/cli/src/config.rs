//! Run configuration file.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "experiment": { "n_trials": 100, "seed": 7 },
//!   "model": { "kind": "physical", "n_antennas": 64, "azimuths": [0.0] },
//!   "power": 1.0,
//!   "sigma2": 1.0,
//!   "output": { "path": "curves.csv", "plot": "curves.gp" }
//! }
//! ```
//!
//! Every section is optional except `schema_version`; command-line flags
//! override the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pilotspace::experiments::ExperimentConfig;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ls,
    Physical,
    AngleConstrained,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Option<ModelKind>,
    pub n_antennas: Option<usize>,
    /// Radians.
    pub azimuths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub model: ModelSection,
    pub power: Option<f64>,
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentConfig::default(),
            model: ModelSection::default(),
            power: None,
            sigma2: None,
            output: OutputSection::default(),
        }
    }
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        // serde_json reports line and column
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version);
        }
        for (name, v) in [("power", cfg.power), ("sigma2", cfg.sigma2)] {
            if let Some(x) = v {
                positive(name, x)?;
            }
        }
        if cfg.model.n_antennas == Some(0) {
            bail!("model.n_antennas must be ≥ 1");
        }
        cfg.experiment.validate().context("invalid experiment section")?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config {}", path.display()))
    }
}

pub fn positive(name: &str, x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        bail!("{name} must be positive and finite, got {x}");
    }
    Ok(x)
}
