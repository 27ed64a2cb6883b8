use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

const DEFAULTS: &str = include_str!("defaults.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Precision {
    pub initial_bits: u32,
    pub max_bits: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Checks {
    pub horizon: usize,
    pub from_k: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Example1Defaults {
    pub threshold: usize,
    pub start: usize,
    pub gap: usize,
    pub prefix: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Config {
    pub precision: Precision,
    pub checks: Checks,
    pub example1: Example1Defaults,
    section5: BTreeMap<String, Vec<usize>>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The configuration shipped with the library.
    pub fn builtin() -> &'static Config {
        static CELL: OnceLock<Config> = OnceLock::new();
        CELL.get_or_init(|| Config::from_toml(DEFAULTS).expect("embedded defaults parse"))
    }

    /// Default prefix Q(1..=k1+1) of the cascade family.
    pub fn cascade_prefix(&self, k1: usize) -> Option<Vec<usize>> {
        self.section5.get(&k1.to_string()).cloned()
    }

    pub fn cascade_defaults(&self) -> Vec<(usize, Vec<usize>)> {
        let mut v: Vec<_> = self
            .section5
            .iter()
            .filter_map(|(k, p)| k.parse().ok().map(|k| (k, p.clone())))
            .collect();
        v.sort();
        v
    }
}
