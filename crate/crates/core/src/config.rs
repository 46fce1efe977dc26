//! JSON configuration files: a flat object with the numeric keys
//! `n0, c1t, c1m, c2t, c2m, mu, gamma`. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CostCoefficients, OnRampConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n0: f64,
    pub c1t: f64,
    pub c1m: f64,
    pub c2t: f64,
    pub c2m: f64,
    pub mu: f64,
    pub gamma: f64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<OnRampConfig<f64>, ConfigError> {
        let costs = CostCoefficients {
            c1t: self.c1t,
            c1m: self.c1m,
            c2t: self.c2t,
            c2m: self.c2m,
            mu: self.mu,
            gamma: self.gamma,
        };
        Ok(OnRampConfig::new(self.n0, costs)?)
    }

    pub fn from_config(config: &OnRampConfig<f64>) -> Self {
        let c = config.costs();
        Self {
            n0: config.n0(),
            c1t: c.c1t,
            c1m: c.c1m,
            c2t: c.c2t,
            c2m: c.c2m,
            mu: c.mu,
            gamma: c.gamma,
        }
    }
}

pub fn parse_config(text: &str) -> Result<OnRampConfig<f64>, ConfigError> {
    serde_json::from_str::<ConfigFile>(text)?.to_config()
}

pub fn load_config(path: &Path) -> Result<OnRampConfig<f64>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
