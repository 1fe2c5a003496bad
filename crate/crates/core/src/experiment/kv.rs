use std::collections::BTreeMap;
use std::str::FromStr;

use crate::model::ConfigError;

/// Flat `key = value` settings with dotted section prefixes. Blank lines
/// and `#` comments are ignored; later assignments win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for line in text.lines() {
            let line = line.split_once('#').map_or(line, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::BadValue {
                key: line.to_owned(),
                value: String::new(),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::BadValue {
                    key: String::new(),
                    value: v.trim().to_owned(),
                });
            }
            entries.insert(k.to_owned(), v.trim().to_owned());
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn merge(&mut self, other: &KvConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    /// The value of `key`; an empty value counts as unset.
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_owned(),
                    value: v.to_owned(),
                })
            })
            .transpose()
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<V: FromStr>(&self, key: &str) -> Result<V, ConfigError> {
        self.get(key)?.ok_or_else(|| ConfigError::Missing(key.to_owned()))
    }

    /// Comma-separated list; `None` when the key is absent.
    pub fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse().map_err(|_| ConfigError::BadValue {
                            key: key.to_owned(),
                            value: s.to_owned(),
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        self.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
