//! Service configuration: a line-based `key = value` file, overridden by
//! `GOVSHEET_*` environment variables.
//!
//! ```text
//! # govsheet.conf
//! listen = 127.0.0.1:8080
//! store = /var/lib/govsheet/store.gsj
//! admin_token_seed = change-me
//! log_level = info
//! sync = true
//! ```

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const ENV_PREFIX: &str = "GOVSHEET_";

/// Principal created on first start and authenticated by the admin token.
pub const ADMIN_PRINCIPAL: &str = "admin";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub listen: SocketAddr,
    pub store: PathBuf,
    /// Bearer token accepted for the bootstrap administrator. Without it
    /// the service only accepts minted tokens.
    pub admin_token_seed: Option<String>,
    pub log_level: String,
    /// fsync every commit.
    pub sync: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store: PathBuf::from("govsheet.gsj"),
            admin_token_seed: None,
            log_level: "info".into(),
            sync: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    Value { key: String, value: String },
}

const KEYS: [&str; 5] = ["listen", "store", "admin_token_seed", "log_level", "sync"];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.insert(key.to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Config {
    /// Reads `path` (if given), then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                path: p.display().to_string(),
                message: e.to_string(),
            })?,
            None => String::new(),
        };
        Self::from_sources(&text, std::env::vars())
    }

    pub fn from_sources(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, ConfigError> {
        let mut pairs = parse_pairs(text)?;
        for (k, v) in env {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if KEYS.contains(&key.as_str()) {
                    pairs.insert(key, v);
                }
            }
        }
        let mut cfg = Config::default();
        for (key, value) in pairs {
            let bad = || ConfigError::Value {
                key: key.clone(),
                value: value.clone(),
            };
            match key.as_str() {
                "listen" => cfg.listen = value.parse().map_err(|_| bad())?,
                "store" => {
                    if value.is_empty() {
                        return Err(bad());
                    }
                    cfg.store = PathBuf::from(&value);
                }
                "admin_token_seed" => cfg.admin_token_seed = (!value.is_empty()).then(|| value.clone()),
                "log_level" => cfg.log_level = value.clone(),
                "sync" => {
                    cfg.sync = match value.to_ascii_lowercase().as_str() {
                        "true" | "yes" | "1" | "on" => true,
                        "false" | "no" | "0" | "off" => false,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(ConfigError::UnknownKey(key)),
            }
        }
        Ok(cfg)
    }
}
