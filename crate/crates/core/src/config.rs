//! Run configuration: a flat TOML file, `key=value` overrides, and built-in
//! defaults, in that order of precedence (overrides win).
//!
//! Recognized keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `alpha_db_per_km` | fiber loss | 0.21 |
//! | `eta_b` | Bob-side efficiency | 0.045 |
//! | `d_b` | Bob dark count per pulse | 1.7e-6 |
//! | `e_d` | misalignment error | 0.033 |
//! | `e_0` | dark-count error rate (must be 0.5) | 0.5 |
//! | `eta_a` | trigger efficiency | 0.8 |
//! | `d_a` | trigger dark count per pulse | 1e-5 |
//! | `mu` | decoy intensity | 0.05 |
//! | `mu_prime_min` | lower end of the signal search | `mu + mu_prime_coarse_step` |
//! | `mu_prime_max` | upper end of the signal search | 1.0 |
//! | `mu_prime_coarse_step` | coarse grid step | 0.01 |
//! | `f_ec` | error-correction inefficiency | 1.2 |
//! | `dist_start_km`, `dist_stop_km`, `dist_step_km` | distance grid | 0, 180, 1 |
//! | `sources` | comma-separated subset of `hsps`, `wcs`, `ideal` | `"hsps,wcs,ideal"` |

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizer::{default_mu_prime_min, SourceSelection, SweepConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("malformed override `{0}`: expected key=value")]
    Override(String),

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// The on-disk form. Every key is optional; missing keys take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_db_per_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_prime_coarse_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_ec: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_start_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_stop_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_step_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<String>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Fill in defaults and validate.
    pub fn resolve(&self) -> Result<SweepConfig, ConfigError> {
        let d = SweepConfig::default();
        let mut cfg = d;
        let ch = &mut cfg.protocol.channel;
        ch.alpha_db_per_km = self.alpha_db_per_km.unwrap_or(ch.alpha_db_per_km);
        ch.eta_b = self.eta_b.unwrap_or(ch.eta_b);
        ch.d_b = self.d_b.unwrap_or(ch.d_b);
        ch.e_d = self.e_d.unwrap_or(ch.e_d);
        ch.e_0 = self.e_0.unwrap_or(ch.e_0);
        cfg.protocol.eta_a = self.eta_a.unwrap_or(d.protocol.eta_a);
        cfg.protocol.d_a = self.d_a.unwrap_or(d.protocol.d_a);
        cfg.protocol.f_ec = self.f_ec.unwrap_or(d.protocol.f_ec);
        cfg.mu = self.mu.unwrap_or(d.mu);
        cfg.mu_prime_coarse_step = self.mu_prime_coarse_step.unwrap_or(d.mu_prime_coarse_step);
        cfg.mu_prime_min = self
            .mu_prime_min
            .unwrap_or_else(|| default_mu_prime_min(cfg.mu, cfg.mu_prime_coarse_step));
        cfg.mu_prime_max = self.mu_prime_max.unwrap_or(d.mu_prime_max);
        cfg.dist_start_km = self.dist_start_km.unwrap_or(d.dist_start_km);
        cfg.dist_stop_km = self.dist_stop_km.unwrap_or(d.dist_stop_km);
        cfg.dist_step_km = self.dist_step_km.unwrap_or(d.dist_step_km);
        if let Some(s) = &self.sources {
            cfg.sources = parse_sources(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every key written out explicitly.
    pub fn materialized(cfg: &SweepConfig) -> Self {
        let ch = &cfg.protocol.channel;
        Self {
            alpha_db_per_km: Some(ch.alpha_db_per_km),
            eta_b: Some(ch.eta_b),
            d_b: Some(ch.d_b),
            e_d: Some(ch.e_d),
            e_0: Some(ch.e_0),
            eta_a: Some(cfg.protocol.eta_a),
            d_a: Some(cfg.protocol.d_a),
            mu: Some(cfg.mu),
            mu_prime_min: Some(cfg.mu_prime_min),
            mu_prime_max: Some(cfg.mu_prime_max),
            mu_prime_coarse_step: Some(cfg.mu_prime_coarse_step),
            f_ec: Some(cfg.protocol.f_ec),
            dist_start_km: Some(cfg.dist_start_km),
            dist_stop_km: Some(cfg.dist_stop_km),
            dist_step_km: Some(cfg.dist_step_km),
            sources: Some(format_sources(&cfg.sources)),
        }
    }
}

pub fn parse_sources(s: &str) -> Result<SourceSelection, ConfigError> {
    let mut sel = SourceSelection {
        hsps: false,
        wcs: false,
        ideal: false,
    };
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.to_ascii_lowercase().as_str() {
            "hsps" => sel.hsps = true,
            "wcs" => sel.wcs = true,
            "ideal" => sel.ideal = true,
            "both" => {
                sel.hsps = true;
                sel.wcs = true;
            }
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "sources: unknown entry `{token}` (expected hsps, wcs, both or ideal)"
                )))
            }
        }
    }
    if !(sel.hsps || sel.wcs) {
        return Err(ConfigError::Invalid(format!(
            "sources = \"{s}\" selects no source (need hsps and/or wcs)"
        )));
    }
    Ok(sel)
}

pub fn format_sources(sel: &SourceSelection) -> String {
    let mut parts = Vec::new();
    if sel.hsps {
        parts.push("hsps");
    }
    if sel.wcs {
        parts.push("wcs");
    }
    if sel.ideal {
        parts.push("ideal");
    }
    parts.join(",")
}

fn parse_override_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&probe) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Resolve a [`SweepConfig`] from an optional config file plus `key=value`
/// overrides.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<SweepConfig, ConfigError> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            toml::from_str::<toml::Table>(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(item.clone()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Override(item.clone()));
        }
        table.insert(key.to_string(), parse_override_value(value.trim()));
    }
    let file: ConfigFile = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    file.resolve()
}

/// Record of one run: the fully resolved configuration and what was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub command: String,
    pub artifacts: Vec<String>,
    pub config: ConfigFile,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &SweepConfig) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            command: command.to_string(),
            artifacts: Vec::new(),
            config: ConfigFile::materialized(cfg),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are all TOML-representable")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}
