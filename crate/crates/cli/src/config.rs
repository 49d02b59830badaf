//! Run configuration: a TOML file whose values command-line flags override.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::{Deserialize, Serialize};
use wfaug::graph::{StartChoice, WalkConfig, WeightMode};
use wfaug::spatial::SpatialRanges;
use wfaug::temporal::StrideTable;

use crate::Usage;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "WFAUG_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub catalog: Option<PathBuf>,
    /// Tool presence threshold for per-tool annotation files.
    pub threshold: f64,
    pub mode: WeightMode,
    /// Use this graph file instead of extracting one.
    pub graph: Option<PathBuf>,
    pub decay: f64,
    pub max_walk_len: usize,
    pub start_choice: StartChoice,
    pub final_continue_prob: f64,
    pub max_resamples: usize,
    pub num_videos: usize,
    pub seed: u64,
    pub spatial: SpatialRanges,
    pub strides: Vec<u32>,
    pub interpolator: String,
    pub eval_stride: usize,
    pub split_k: usize,
    pub output: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let walk = WalkConfig::default();
        Self {
            catalog: None,
            threshold: wfaug::annotation::DEFAULT_THRESHOLD,
            mode: WeightMode::Uniform,
            graph: None,
            decay: walk.decay,
            max_walk_len: walk.max_len,
            start_choice: walk.start_choice,
            final_continue_prob: walk.final_continue_prob,
            max_resamples: wfaug::assemble::DEFAULT_MAX_RESAMPLES,
            num_videos: 10,
            seed: 0,
            spatial: SpatialRanges::default(),
            strides: StrideTable::CANONICAL.to_vec(),
            interpolator: "linear".into(),
            eval_stride: 15,
            split_k: 10,
            output: None,
        }
    }
}

impl Config {
    /// Reads `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config =
            toml::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.catalog, &mut cfg.graph, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Explicit path, else the environment variable, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn walk(&self) -> WalkConfig {
        WalkConfig {
            decay: self.decay,
            max_len: self.max_walk_len,
            start_choice: self.start_choice,
            final_continue_prob: self.final_continue_prob,
        }
    }

    pub fn stride_table(&self) -> wfaug::Result<StrideTable> {
        StrideTable::new(self.strides.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && (0.0..1.0).contains(&self.threshold)) {
            return Err(Usage(format!("threshold must be in [0, 1), got {}", self.threshold)).into());
        }
        if self.eval_stride == 0 {
            return Err(Usage("evaluation stride must be positive".into()).into());
        }
        if self.split_k == 0 {
            return Err(Usage("split factor must be positive".into()).into());
        }
        self.walk().validate()?;
        self.spatial.validate()?;
        self.stride_table()?;
        wfaug::temporal::interpolator_by_name(&self.interpolator)?;
        Ok(())
    }
}
