//! Planner configuration file (TOML).
//!
//! ```toml
//! [robot]
//! workspace_r_max = 0.95
//!
//! [expert]
//! lookahead = 2
//!
//! [search]
//! n_samp = 200
//! seed = 7
//!
//! [reward]
//! sim_step = 3.0
//! ```
//!
//! Every section and field is optional; missing values take their defaults
//! and unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expert::ExpertWeights;
use crate::mcts::{RewardWeights, SearchConfig, SearchError};
use crate::model::{ModelError, RobotModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("invalid expert weights: {0}")]
    Expert(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub robot: RobotModel,
    pub expert: ExpertWeights,
    pub search: SearchConfig,
    pub reward: RewardWeights,
}

impl PlannerConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate()?;
        self.search.validate()?;
        let e = &self.expert;
        if [e.w1, e.w2, e.w_l, e.w_m].iter().any(|w| !w.is_finite()) {
            return Err(ConfigError::Expert("weights must be finite".into()));
        }
        if e.top_k == 0 {
            return Err(ConfigError::Expert("top_k must be at least 1".into()));
        }
        Ok(())
    }
}
