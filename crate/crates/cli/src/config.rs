//! Config-file loading and flag resolution.
//!
//! Precedence: explicit CLI flag, then config-file key, then built-in
//! default. The resolver records every resolved value so the run manifest
//! can reproduce the effective configuration. Config files are either a
//! flat JSON object or `key=value` lines (`#` comments allowed).

use asgpose_core::{Error, NormalizationMode, Result};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config file is not valid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::invalid("config JSON must be an object"))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            map.insert(k.clone(), s);
        }
        return Ok(map);
    }
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got '{line}'"),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl Resolver {
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Validation(format!("cannot open config {}: {e}", path.display()))
                })?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn file_value<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::invalid(format!("config {key}='{raw}': {e}"))),
        }
    }

    /// Flag, else config key, else default.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Flag or config key; missing is an error.
    pub fn get_required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.file_value(key)?.ok_or_else(|| {
                Error::invalid(format!("missing required --{key} (or config key '{key}')"))
            })?,
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Flag or config key; absent stays absent.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn get_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        let value = match flag {
            Some(v) => v,
            None => PathBuf::from(self.file.get(key).cloned().ok_or_else(|| {
                Error::invalid(format!("missing required --{key} (or config key '{key}')"))
            })?),
        };
        self.resolved
            .insert(key.to_string(), value.display().to_string());
        Ok(value)
    }

    pub fn get_path_opt(&mut self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        let value = match flag {
            Some(v) => Some(v),
            None => self.file.get(key).map(PathBuf::from),
        };
        if let Some(v) = &value {
            self.resolved
                .insert(key.to_string(), v.display().to_string());
        }
        value
    }

    /// Presence flags: true on the command line wins; otherwise the config
    /// key parsed as bool.
    pub fn get_bool(&mut self, key: &str, flag: bool) -> Result<bool> {
        let value = if flag {
            true
        } else {
            self.file_value::<bool>(key)?.unwrap_or(false)
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

/// `softmax` (with its scale) or `linear`.
pub fn parse_mode(mode: &str, scale: f64) -> Result<NormalizationMode> {
    match mode {
        "softmax" => {
            let m = NormalizationMode::Softmax { scale };
            m.validate()?;
            Ok(m)
        }
        "linear" => Ok(NormalizationMode::Linear),
        other => Err(Error::invalid(format!(
            "unknown normalization mode '{other}' (softmax | linear)"
        ))),
    }
}

/// Comma-separated list of numbers.
pub fn parse_list<T>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Error::invalid(format!("{what} entry '{s}': {e}")))
        })
        .collect()
}
