//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # comment
//! dist.kind = sphere
//! dist.d = 256
//! sweep.d_tilde = 32, 64, 128, 256
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(LabError::Config(format!("line {}: invalid key `{key}`", lineno + 1)));
            }
            let value = value.trim().trim_matches('"').to_string();
            if entries.insert(key.to_string(), value).is_some() {
                return Err(LabError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| LabError::Config(format!("key `{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| LabError::Config(format!("missing required key `{key}`")))
    }

    /// Comma-separated list, optionally wrapped in brackets.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let inner = v.trim().trim_start_matches('[').trim_end_matches(']');
        if inner.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        inner
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<T>()
                    .map_err(|e| LabError::Config(format!("key `{key}`: cannot parse `{item}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Entries under `prefix.` with the prefix removed.
    pub fn section(&self, prefix: &str) -> KvConfig {
        let dotted = format!("{prefix}.");
        KvConfig {
            entries: self
                .entries
                .iter()
                .filter_map(|(k, v)| k.strip_prefix(&dotted).map(|rest| (rest.to_string(), v.clone())))
                .collect(),
        }
    }

    /// Errors on any key not in `allowed`. An entry ending in `.*` admits a
    /// whole section.
    pub fn ensure_known(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            let ok = allowed.iter().any(|a| match a.strip_suffix(".*") {
                Some(prefix) => key.starts_with(prefix) && key[prefix.len()..].starts_with('.'),
                None => a == key,
            });
            if !ok {
                return Err(LabError::Config(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}
