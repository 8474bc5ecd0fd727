//! Flat `key=value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    /// Blank lines and lines starting with `#` are ignored. Later keys win.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(origin, i + 1, format!("expected key=value, got '{line}'")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::format(origin, i + 1, "empty key"));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KeyValues::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Usage(format!("config key '{key}' has invalid value '{v}'")))
            })
            .transpose()
    }

    pub fn into_map(self) -> BTreeMap<String, String> {
        self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments() {
        let kv = KeyValues::parse("# training\ndim = 300\n\nwindow=2\n", Path::new("c")).unwrap();
        assert_eq!(kv.get("dim"), Some("300"));
        assert_eq!(kv.parsed::<usize>("window").unwrap(), Some(2));
        assert_eq!(kv.parsed::<usize>("missing").unwrap(), None);
    }

    #[test]
    fn bad_line() {
        let err = KeyValues::parse("dim 300", Path::new("c.cfg")).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn bad_value() {
        let kv = KeyValues::parse("dim=abc", Path::new("c")).unwrap();
        assert!(kv.parsed::<usize>("dim").is_err());
    }
}
