//! Layered `key=value` settings: built-in defaults, then an optional config
//! file, then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::UsageError;

/// Keys a config file may carry that are not parameters (manifest
/// bookkeeping). They are accepted and ignored.
const BOOKKEEPING: [&str; 5] = ["command", "tool_version", "started_at", "finished_at", "master_seed"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(normalize(key), value.to_string());
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn parse_text(text: &str) -> Result<Self, UsageError> {
        let mut s = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = normalize(k);
            if BOOKKEEPING.contains(&key.as_str()) {
                continue;
            }
            s.values.insert(key, v.trim().to_string());
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, UsageError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| UsageError(format!("missing required parameter --{}", key.replace('_', "-"))))?;
        raw.parse().map_err(|_| UsageError(format!("invalid value for {key}: {raw:?}")))
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, UsageError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| UsageError(format!("missing required parameter --{}", key.replace('_', "-"))))?;
        raw.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| UsageError(format!("invalid entry {s:?} in {key}"))))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
