//! Run configuration: a TOML file plus flag overrides, fully resolved and
//! serialized into every run's metadata sidecar so a run is reproducible
//! from the sidecar alone.

use std::path::Path;

use harmonic_delaunay::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCfg {
    pub dim: usize,
    /// Box side length.
    pub len: f64,
    pub lambda: f64,
    pub seed: u64,
    pub palm: bool,
}

impl Default for SampleCfg {
    fn default() -> Self {
        SampleCfg {
            dim: 2,
            len: 24.0,
            lambda: 1.0,
            seed: 7,
            palm: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveCfg {
    pub tilt: [f64; 2],
    pub tol: f64,
    pub max_iter: u64,
    /// `cg` or `gs`.
    pub method: String,
}

impl Default for SolveCfg {
    fn default() -> Self {
        SolveCfg {
            tilt: [1.0, 0.0],
            tol: 1e-10,
            max_iter: 1_000_000,
            method: "cg".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessCfg {
    pub enabled: bool,
    pub t_max: f64,
    pub seed: u64,
    /// Checkpoint cadence for the trace CSV (events).
    pub trace_every: u64,
}

impl Default for HarnessCfg {
    fn default() -> Self {
        HarnessCfg {
            enabled: false,
            t_max: 20.0,
            seed: 11,
            trace_every: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderCfg {
    pub levels: usize,
}

impl Default for RenderCfg {
    fn default() -> Self {
        RenderCfg { levels: 12 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sample: SampleCfg,
    pub solve: SolveCfg,
    pub harness: HarnessCfg,
    pub render: RenderCfg,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample.dim != 2 {
            return Err(Error::InvalidParameter(
                "sample.dim: pipeline renders require dimension 2".into(),
            ));
        }
        if self.sample.len <= 0.0 {
            return Err(Error::InvalidParameter(
                "sample.len must be positive".into(),
            ));
        }
        if self.sample.lambda <= 0.0 {
            return Err(Error::InvalidParameter(
                "sample.lambda must be positive".into(),
            ));
        }
        if self.solve.tol <= 0.0 {
            return Err(Error::InvalidParameter("solve.tol must be positive".into()));
        }
        if self.harness.enabled && self.harness.t_max <= 0.0 {
            return Err(Error::InvalidParameter(
                "harness.t_max must be positive".into(),
            ));
        }
        self.solve.method.parse::<harmonic_delaunay::solver::Method>()?;
        Ok(())
    }
}

/// The sidecar stored as `run.meta` in every pipeline output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub config: RunConfig,
    pub generator: String,
    pub version: String,
}

impl RunMeta {
    pub fn new(config: RunConfig) -> Self {
        RunMeta {
            config,
            generator: harmonic_delaunay::rng::GENERATOR_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: RunConfig =
        toml::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_meta(path: &Path) -> Result<RunMeta> {
    let text = std::fs::read_to_string(path)?;
    let meta: RunMeta =
        serde_json::from_str(&text).map_err(|e| Error::Metadata(e.to_string()))?;
    meta.config.validate()?;
    Ok(meta)
}
