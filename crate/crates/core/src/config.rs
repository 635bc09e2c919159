//! Engine configuration (TOML). Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::TextNetConfig;
use crate::adjuster::{EvalWeights, SearchConfig};
use crate::planner::prerank::PrerankConfig;
use crate::planner::rank::RankConfig;
use crate::planner::recall::RecallConfig;

/// Environment variable consulted when `--config` is absent.
pub const CONFIG_ENV: &str = "BANNERFORGE_CONFIG";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub library: PathBuf,
    #[serde(default)]
    pub elements: Option<PathBuf>,
    #[serde(default)]
    pub rank_model: Option<PathBuf>,
    #[serde(default)]
    pub text_model: Option<PathBuf>,
    /// TrueType font; the embedded font is used when absent.
    #[serde(default)]
    pub font: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub paths: PathsConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub recall: RecallConfig,
    #[serde(default)]
    pub prerank: PrerankConfig,
    #[serde(default)]
    pub rank: RankConfig,
    #[serde(default)]
    pub weights: EvalWeights,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub textnet: TextNetConfig,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config is invalid:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("no config given (use --config or set {CONFIG_ENV})")]
    Missing,
}

impl EngineConfig {
    /// A config with defaults everywhere and only a library path.
    pub fn with_library(library: impl Into<PathBuf>) -> EngineConfig {
        EngineConfig {
            paths: PathsConfig { library: library.into(), ..PathsConfig::default() },
            seed: default_seed(),
            recall: RecallConfig::default(),
            prerank: PrerankConfig::default(),
            rank: RankConfig::default(),
            weights: EvalWeights::default(),
            search: SearchConfig::default(),
            textnet: TextNetConfig::default(),
        }
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<EngineConfig, ConfigError> {
        let mut cfg: EngineConfig = toml::from_str(text)
            .map_err(|e| ConfigError::Parse { path: base.to_path_buf(), message: e.to_string() })?;
        cfg.resolve(base);
        Ok(cfg)
    }

    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<EngineConfig, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = EngineConfig::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_path_buf(), message },
            e => e,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.paths.library);
        for p in
            [&mut self.paths.elements, &mut self.paths.rank_model, &mut self.paths.text_model, &mut self.paths.font]
                .into_iter()
                .flatten()
        {
            join(p);
        }
    }

    /// Checks numeric ranges and that every referenced path exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if let Err(e) = self.recall.validate() {
            problems.push(e);
        }
        if let Err(e) = self.weights.validate() {
            problems.push(e);
        }
        let p = &self.prerank;
        if !(0.0..=1.0).contains(&p.clash_saturation) {
            problems.push("prerank: clash_saturation must lie in [0, 1]".into());
        }
        if !(0.0 <= p.clash_hue_min && p.clash_hue_min <= p.clash_hue_max && p.clash_hue_max <= 360.0) {
            problems.push("prerank: need 0 <= clash_hue_min <= clash_hue_max <= 360".into());
        }
        let b = &self.rank.params;
        if b.trees == 0 || b.max_depth == 0 || b.min_leaf == 0 || !(b.learning_rate > 0.0 && b.learning_rate <= 1.0) {
            problems.push("rank: trees, max_depth, min_leaf must be positive and learning_rate in (0, 1]".into());
        }
        if self.search.budget == 0 || self.search.patience == 0 {
            problems.push("search: budget and patience must be positive".into());
        }
        let t = &self.textnet;
        if t.hidden == 0
            || t.epochs == 0
            || t.batch_size == 0
            || !(t.learning_rate > 0.0)
            || !(0.0..1.0).contains(&t.momentum)
        {
            problems.push(
                "textnet: hidden, epochs, batch_size, learning_rate must be positive and momentum in [0, 1)".into(),
            );
        }
        if !self.paths.library.is_dir() {
            problems.push(format!("paths.library: {} is not a directory", self.paths.library.display()));
        }
        if let Some(e) = &self.paths.elements {
            if !e.is_dir() {
                problems.push(format!("paths.elements: {} is not a directory", e.display()));
            }
        }
        for (name, p) in
            [("rank_model", &self.paths.rank_model), ("text_model", &self.paths.text_model), ("font", &self.paths.font)]
        {
            if let Some(p) = p {
                if !p.is_file() {
                    problems.push(format!("paths.{name}: {} does not exist", p.display()));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }
}
