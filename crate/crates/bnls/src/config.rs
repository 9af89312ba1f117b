//! Flat key-value run configuration with dotted sections.
//!
//! The textual form is one `key = value` per line, keys sorted, `#`
//! comments allowed on their own lines. Parsing and printing round-trip
//! losslessly, and consumers must drain every key they understand so that
//! unknown keys are rejected.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pairs: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`, got {:?}", lineno + 1, raw);
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                bail!("config line {}: bad key {:?}", lineno + 1, key);
            }
            if pairs.insert(key.to_string(), value.trim().to_string()).is_some() {
                bail!("config line {}: duplicate key {:?}", lineno + 1, key);
            }
        }
        Ok(RunConfig { pairs })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Insert or override (flags override file values).
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.pairs.insert(key.to_string(), value.to_string());
    }

    pub fn set_if_absent(&mut self, key: &str, value: impl ToString) {
        self.pairs.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    /// Remove and return a key (consumers drain what they understand).
    pub fn consume(&mut self, key: &str) -> Option<String> {
        self.pairs.remove(key)
    }

    pub fn consume_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.pairs.remove(key) {
            None => Ok(None),
            Some(v) => match v.parse::<T>() {
                Ok(t) => Ok(Some(t)),
                Err(e) => bail!("config key {} = {:?}: {}", key, v, e),
            },
        }
    }

    /// Error out if any unconsumed keys remain.
    pub fn ensure_empty(&self) -> Result<()> {
        if let Some((key, _)) = self.pairs.iter().next() {
            bail!("unknown config key {:?}", key);
        }
        Ok(())
    }

    /// Canonical text: sorted `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Content hash in git blob framing: `sha256("blob {len}\0" + text)`.
pub fn blob_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", text.len()).as_bytes());
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{:02x}", b));
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let text = "study.kind = invariance\nstudy.n = 16\nseed = 7\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.to_text(), "seed = 7\nstudy.kind = invariance\nstudy.n = 16\n");
        let again = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_malformed_and_duplicates() {
        assert!(RunConfig::parse("just words\n").is_err());
        assert!(RunConfig::parse("a = 1\na = 2\n").is_err());
        assert!(RunConfig::parse("bad key = 1\n").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RunConfig::parse("study.kind = invariance\ntypo = 3\n").unwrap();
        assert_eq!(cfg.consume("study.kind").as_deref(), Some("invariance"));
        assert!(cfg.ensure_empty().is_err());
        assert_eq!(cfg.consume("typo").as_deref(), Some("3"));
        assert!(cfg.ensure_empty().is_ok());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = blob_hash("hello\n");
        assert_eq!(a, blob_hash("hello\n"));
        assert_ne!(a, blob_hash("hello"));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn randomized_round_trip() {
        use bnls_core::random::{derive_trajectory_seed, gaussian_mode};
        for trial in 0..50u64 {
            let mut cfg = RunConfig::new();
            for i in 0..8i64 {
                let g = gaussian_mode(derive_trajectory_seed(trial, i as u64), i);
                cfg.set(&format!("k{}.v{}", trial % 5, i), format!("{}", g.re));
            }
            let parsed = RunConfig::parse(&cfg.to_text()).unwrap();
            assert_eq!(cfg, parsed);
        }
    }
}
