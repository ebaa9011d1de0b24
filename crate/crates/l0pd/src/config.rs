//! Flat `key=value` settings files.
//!
//! One pair per line, `#` starts a comment, blank lines ignored. Values stay
//! strings until a typed getter is called; command-line flags are merged on
//! top of file values by the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Malformed { line: usize, content: String },
    BadValue { key: String, value: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "{e}"),
            ConfigError::Malformed { line, content } => {
                write!(f, "line {line}: expected key=value, got {content:?}")
            }
            ConfigError::BadValue { key, value } => {
                write!(f, "invalid value {value:?} for key {key:?}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl Settings {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line: lineno + 1,
                    content: raw.to_string(),
                });
            };
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    /// Overwrites the value for `key`; used for flag overrides.
    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_blanks() {
        let s = Settings::parse("a = 1\n# full comment\n\nlambda0=0.1 # trailing\n").unwrap();
        assert_eq!(s.get("a"), Some("1"));
        assert_eq!(s.get("lambda0"), Some("0.1"));
        assert_eq!(s.get_parsed::<f64>("lambda0").unwrap(), Some(0.1));
        assert_eq!(s.get_parsed::<f64>("missing").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        match Settings::parse("ok=1\nnot a pair\n") {
            Err(ConfigError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
        let s = Settings::parse("x=abc\n").unwrap();
        assert!(s.get_parsed::<f64>("x").is_err());
    }

    #[test]
    fn set_overrides_file_value() {
        let mut s = Settings::parse("lambda0=0.1\n").unwrap();
        s.set("lambda0", "0.7".into());
        assert_eq!(s.get_parsed::<f64>("lambda0").unwrap(), Some(0.7));
    }
}
