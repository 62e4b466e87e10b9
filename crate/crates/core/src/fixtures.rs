//! Shipped datasets and golden reference values.
//!
//! Fixtures are embedded at build time so they resolve regardless of the
//! working directory.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::FrequencyCounts;

const FIXTURES: &[(&str, &str)] = &[
    ("beetles", include_str!("../fixtures/beetles.tsv")),
    ("uniform10", include_str!("../fixtures/uniform10.tsv")),
    ("singleton100", include_str!("../fixtures/singleton100.tsv")),
];

const GOLDEN: &str = include_str!("../fixtures/golden.json");

pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(name, _)| *name)
}

pub fn load_fixture(name: &str) -> Result<FrequencyCounts> {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidData(format!("no fixture named `{name}`")))?;
    text.parse()
}

/// Where a golden value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Transcribed from a published table.
    Published,
    /// Computed by an independent reference implementation, named in `oracle`.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub id: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub expected: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
}

impl GoldenRecord {
    pub fn accepts(&self, value: f64) -> bool {
        (value - self.expected).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub version: u32,
    pub records: Vec<GoldenRecord>,
}

impl GoldenFile {
    pub fn get(&self, id: &str) -> Option<&GoldenRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Records whose id starts with `prefix`.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a GoldenRecord> + 'a {
        self.records.iter().filter(move |r| r.id.starts_with(prefix))
    }

    /// Checks hashes, provenance and tolerances; returns the first problem.
    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            let bad = |msg: &str| Err(Error::InvalidData(format!("golden record `{}`: {msg}", r.id)));
            if config_hash(&r.config) != r.config_hash {
                return bad("config hash mismatch");
            }
            if r.provenance == Provenance::Derived && r.oracle.is_none() {
                return bad("derived record must name its oracle");
            }
            if !(r.tolerance > 0.0 && r.expected.is_finite()) {
                return bad("needs a finite value and positive tolerance");
            }
        }
        Ok(())
    }
}

pub fn load_golden() -> Result<GoldenFile> {
    serde_json::from_str(GOLDEN).map_err(|e| Error::InvalidData(format!("golden file: {e}")))
}

/// SHA-256 of the compact JSON encoding (object keys sorted), hex encoded.
pub fn config_hash(config: &serde_json::Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_fixtures() {
        let b = load_fixture("beetles").unwrap();
        assert_eq!((b.k(), b.n()), (78, 127));
        let u = load_fixture("uniform10").unwrap();
        assert_eq!((u.k(), u.n()), (10, 100));
        let s = load_fixture("singleton100").unwrap();
        assert_eq!(s.singletons(), 100);
        assert!(load_fixture("nope").is_err());
        assert_eq!(fixture_names().count(), 3);
    }

    #[test]
    fn golden_file_is_consistent() {
        let g = load_golden().unwrap();
        g.validate().unwrap();
        assert!(g.records.iter().any(|r| r.provenance == Provenance::Derived));
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b":1,"a":2}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"a":2,"b":1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
