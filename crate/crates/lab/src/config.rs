use std::path::{Path, PathBuf};

use rpys_core::{Scale, SpectrumConfig, DEFAULT_MIN_LEN, DEFAULT_THRESHOLD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that overrides the service port.
pub const PORT_ENV: &str = "RPYS_LAB_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// Analysis parameters stored with every session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Similarity needed to merge two references automatically.
    pub threshold: f64,
    /// Median window for deviations (odd).
    pub window: usize,
    /// Count a publication citing one cluster several times once.
    pub dedup_pairs: bool,
    pub min_deviation: f64,
    /// Only years up to this one are reported as peaks.
    pub max_rpy: Option<i32>,
    /// Clusters listed per peak year.
    pub top_k: usize,
    pub k_max: usize,
    pub min_len: usize,
    pub scale: Scale,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            threshold: DEFAULT_THRESHOLD,
            window: 5,
            dedup_pairs: true,
            min_deviation: 0.0,
            max_rpy: None,
            top_k: 10,
            k_max: 8,
            min_len: DEFAULT_MIN_LEN,
            scale: Scale::Log1p,
        }
    }
}

impl SessionConfig {
    pub fn spectrum(&self) -> SpectrumConfig {
        SpectrumConfig {
            window: self.window,
            dedup_pairs: self.dedup_pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub port: u16,
    /// Origin allowed to call the API from a browser.
    pub cors_origin: Option<String>,
    /// Where datasets created through the API are written.
    pub data_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: DEFAULT_PORT,
            cors_origin: None,
            data_dir: None,
        }
    }
}

/// Contents of the optional TOML configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub analysis: SessionConfig,
    pub service: ServiceConfig,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

impl LabConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Port precedence: environment, then command line, then config file.
pub fn resolve_port(env_value: Option<&str>, flag: Option<u16>, config: &ServiceConfig) -> u16 {
    env_value
        .and_then(|v| v.trim().parse().ok())
        .or(flag)
        .unwrap_or(config.port)
}
