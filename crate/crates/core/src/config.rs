//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat; the
//! order of entries is kept.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: Vec<Entry>,
    /// Directory of the source file, used to resolve relative paths.
    base: Option<PathBuf>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected key = value, got {line:?}", idx + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::config(format!("line {}: empty key", idx + 1)));
            }
            entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line: idx + 1,
            });
        }
        Ok(Self { entries, base: None })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Last value for `key`, so later lines override earlier ones.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&Entry> {
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    /// Replaces every value of `key` with `value`.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.retain(|e| e.key != key);
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.into(),
            line: 0,
        });
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::config(format!("{key} = {v:?}: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)?
            .ok_or_else(|| Error::config(format!("missing required key {key:?}")))
    }

    /// Resolves a path value relative to the config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let v = PathBuf::from(self.get(key)?);
        Some(match (&self.base, v.is_relative()) {
            (Some(base), true) => base.join(v),
            _ => v,
        })
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(Error::config(format!(
                    "line {}: unknown key {:?} (expected one of {})",
                    e.line,
                    e.key,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Parses a comma- or whitespace-separated list.
pub fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::config(format!("bad list item {s:?}: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_repeats_and_overrides() {
        let cfg = KvConfig::parse("# model\nprior = 0.3\n\nclass1 = a\nclass1 = b\nprior=0.4\n").unwrap();
        assert_eq!(cfg.get("prior"), Some("0.4"));
        assert_eq!(cfg.get_all("class1").len(), 2);
        assert_eq!(cfg.require::<f64>("prior").unwrap(), 0.4);
        assert!(cfg.require::<f64>("seed").is_err());
        assert!(cfg.check_keys(&["prior"]).is_err());
        assert!(cfg.check_keys(&["prior", "class1"]).is_ok());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(KvConfig::parse("prior 0.5"), Err(Error::Config(_))));
        assert!(KvConfig::parse(" = 3").is_err());
        let cfg = KvConfig::parse("n = ten").unwrap();
        assert!(matches!(cfg.require::<usize>("n"), Err(Error::Config(_))));
    }

    #[test]
    fn lists_and_set() {
        assert_eq!(parse_list::<f64>("1, 2 3,4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(parse_list::<usize>("1,x").is_err());
        let mut cfg = KvConfig::parse("n = 1\nn = 2").unwrap();
        cfg.set("n", "5");
        assert_eq!(cfg.get_all("n").len(), 1);
        assert_eq!(cfg.get("n"), Some("5"));
    }
}
