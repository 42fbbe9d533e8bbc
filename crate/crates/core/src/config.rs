//! Forge configuration, read from a TOML file.
//!
//! ```toml
//! max_objects = 30
//! policy = "centroid"          # or "point_majority"
//! navigation_style = "turn"    # or "relative"
//! synonyms = "synonyms.tsv"
//!
//! [distance]
//! near_m = 1.0
//! far_m = 3.0
//!
//! [spatial]
//! vertical_margin_m = 0.3
//! on_top_gap_m = 0.05
//! proximity_factor = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{NavigationStyle, SpatialRules, Synonyms};
use crate::spatial::{CardinalPolicy, DistanceThresholds};

pub const DEFAULT_MAX_OBJECTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForgeConfig {
    pub max_objects: usize,
    pub policy: CardinalPolicy,
    pub navigation_style: NavigationStyle,
    pub distance: DistanceThresholds,
    pub spatial: SpatialRules,
    /// Synonym table path, relative paths resolve against the config file.
    pub synonyms: Option<PathBuf>,
}

impl Default for ForgeConfig {
    fn default() -> Self {
        Self {
            max_objects: DEFAULT_MAX_OBJECTS,
            policy: CardinalPolicy::default(),
            navigation_style: NavigationStyle::default(),
            distance: DistanceThresholds::default(),
            spatial: SpatialRules::default(),
            synonyms: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Synonyms(#[from] crate::oracle::OracleError),
}

impl ForgeConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ForgeConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(rel), Some(dir)) = (cfg.synonyms.as_ref(), path.parent()) {
            if rel.is_relative() {
                cfg.synonyms = Some(dir.join(rel));
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.max_objects == 0 {
            return Err(ConfigError::Invalid("max_objects must be positive".into()));
        }
        let d = &self.distance;
        if !(d.near_m >= 0.0 && d.near_m <= d.far_m) {
            return Err(ConfigError::Invalid(format!(
                "distance thresholds must satisfy 0 <= near_m <= far_m, got {} and {}",
                d.near_m, d.far_m
            )));
        }
        Ok(())
    }

    pub fn load_synonyms(&self) -> Result<Synonyms, ConfigError> {
        match &self.synonyms {
            None => Ok(Synonyms::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(Synonyms::parse(&text)?)
            }
        }
    }
}
