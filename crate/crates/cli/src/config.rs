//! Flat, diff-friendly `key = value` configuration files. Blank lines and
//! `#` comments are ignored; later assignments override earlier ones.

use std::collections::BTreeMap;

use kuramoto_rc::error::{invalid, Result};

#[derive(Debug, Clone)]
pub struct Config {
    map: BTreeMap<String, String>,
    /// Original file text, echoed into run artifacts.
    pub raw: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected 'key = value', got '{line}'", ln + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(invalid(format!("config line {}: empty key", ln + 1)));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self {
            map,
            raw: text.to_string(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Overrides a key (used for --seed etc.); keeps `raw` untouched but
    /// records the override so the echo stays faithful.
    pub fn set(&mut self, key: &str, value: String) {
        self.raw.push_str(&format!("\n# override\n{key} = {value}\n"));
        self.map.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| invalid(format!("missing required config key '{key}'")))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|_| invalid(format!("config key '{key}' is not a number")))
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.require(key)?
            .parse()
            .map_err(|_| invalid(format!("config key '{key}' is not a nonnegative integer")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("config key '{key}' is not a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("config key '{key}' is not a nonnegative integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| invalid(format!("config key '{key}' is not a u64"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// FNV-1a hash of the effective key-value map, for artifact provenance.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for (k, v) in &self.map {
            eat(k.as_bytes());
            eat(b"=");
            eat(v.as_bytes());
            eat(b"\n");
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_overrides() {
        let cfg = Config::parse("# hi\n\na = 1\nb = two words\na = 3\n").unwrap();
        assert_eq!(cfg.get("a"), Some("3"));
        assert_eq!(cfg.get("b"), Some("two words"));
        assert!(cfg.get("c").is_none());
    }

    #[test]
    fn missing_key_names_the_key() {
        let cfg = Config::parse("a = 1").unwrap();
        let err = cfg.require("epsilon").unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(Config::parse("just words\n").is_err());
    }

    #[test]
    fn hash_tracks_effective_values_only() {
        let a = Config::parse("x = 1\ny = 2").unwrap();
        let b = Config::parse("# comment\ny = 2\nx = 1\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = Config::parse("x = 1\ny = 3").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn set_overrides_and_is_echoed() {
        let mut cfg = Config::parse("seed = 1").unwrap();
        cfg.set("seed", "9".into());
        assert_eq!(cfg.get("seed"), Some("9"));
        assert!(cfg.raw.contains("seed = 9"));
    }
}
