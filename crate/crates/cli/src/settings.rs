//! Session configuration files.
//!
//! A TOML file whose tables flatten into dotted engine overrides:
//!
//! ```toml
//! techniques = ["touch_free_menu", "map_viewer"]
//! mirror_camera = true
//!
//! [face]
//! n_exit = 6
//!
//! [touch_free_menu]
//! timeout_ms = 3000
//!
//! [gateway]
//! state_hz = 20
//! ```
//!
//! The `gateway` table configures the streaming server and is not passed to
//! the engine.

use std::path::Path;

use facefuse_core::technique::TechniqueRegistry;
use facefuse_core::{ConfigError, EngineConfig};
use thiserror::Error;

pub const DEFAULT_STATE_HZ: u32 = 20;

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Engine overrides, applied after any carried by a trace.
    pub overrides: Vec<(String, String)>,
    pub state_hz: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            overrides: Vec::new(),
            state_hz: DEFAULT_STATE_HZ,
        }
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) -> Result<(), String> {
    let scalar = |v: &toml::Value| -> Result<String, String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            toml::Value::Boolean(b) => Ok(b.to_string()),
            other => Err(format!("`{prefix}`: unsupported value {other}")),
        }
    };
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out)?;
            }
        }
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>, String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), parts?.join(",")));
        }
        other => out.push((prefix.to_string(), scalar(other)?)),
    }
    Ok(())
}

impl Settings {
    /// Parses TOML text and checks every override against a default engine
    /// config, so unknown keys and out-of-range values fail here.
    pub fn from_toml(text: &str, origin: &str) -> Result<Settings, SettingsError> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| SettingsError::Syntax {
            path: origin.to_string(),
            message: e.message().to_string(),
        })?;
        let mut flat = Vec::new();
        flatten("", &toml::Value::Table(value), &mut flat).map_err(|message| SettingsError::Syntax {
            path: origin.to_string(),
            message,
        })?;
        let mut settings = Settings::default();
        for (k, v) in flat {
            match k.as_str() {
                "gateway.state_hz" => {
                    settings.state_hz = v
                        .parse()
                        .ok()
                        .filter(|hz| (1..=1000).contains(hz))
                        .ok_or_else(|| ConfigError::invalid(&k, &v, "must be within [1, 1000]"))?;
                }
                _ if k.starts_with("gateway.") => return Err(ConfigError::UnknownKey(k).into()),
                _ => settings.overrides.push((k, v)),
            }
        }
        settings.check()?;
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Settings, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Applies the overrides to a default config and builds every
    /// configured technique.
    pub fn check(&self) -> Result<(), ConfigError> {
        let registry = TechniqueRegistry::builtin();
        let mut cfg = EngineConfig::default();
        for (k, v) in &self.overrides {
            cfg.set(k, v, &registry.ids())?;
        }
        registry.build_engine(&cfg).map(|_| ())
    }

    /// Appends `key=value` command-line overrides.
    pub fn push_overrides(&mut self, pairs: &[String]) -> Result<(), ConfigError> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| ConfigError::invalid(p, "", "expected key=value"))?;
            self.overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        self.check()
    }
}
