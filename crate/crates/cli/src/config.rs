//! Plain-text `key=value` settings with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use depthlab_core::{Error, Result};

/// Merges flag values over a config file and records every value used.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", no + 1)))?;
            file.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    /// Flag, else config entry, else nothing.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse()
                        .map_err(|_| Error::Parse(format!("config {key}: bad value {raw:?}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn need<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
    {
        self.opt(key, flag)?
            .ok_or_else(|| Error::InvalidArgument(format!("missing --{key}")))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("cap = 16\n# note\nt=poly:10,1\n").unwrap();
        assert_eq!(s.get("cap", Some(12usize), 14).unwrap(), 12);
        assert_eq!(s.get::<String>("t", None, "poly:1,1".into()).unwrap(), "poly:10,1");
        assert_eq!(s.get("stage", None, 7u64).unwrap(), 7);
        assert_eq!(s.resolved().len(), 3);
        assert!(Settings::parse("novalue").is_err());
        let mut bad = Settings::parse("cap=x").unwrap();
        assert!(bad.get("cap", None, 1usize).is_err());
    }
}
