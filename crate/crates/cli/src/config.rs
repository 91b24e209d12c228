//! `key = value` configuration files. Keys are the long flag names; flags
//! given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const KEYS: [&str; 12] = [
    "prime",
    "order",
    "cond-min",
    "cond-max",
    "twists",
    "points",
    "series-depth",
    "precision",
    "seed",
    "jobs",
    "cache-dir",
    "out",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected key = value, got '{raw}'", no + 1);
            };
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{}'", no + 1, k.trim());
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("config key '{key}': {e}")))
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.raw(key).map(parse_list).transpose()
    }
}

/// Comma separated integers; `a-b` expands to the inclusive range.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad integer '{part}'"))?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_files() {
        let c = ConfigFile::parse("# scan\nprime = 3,5\ncond_max=500 # bound\n\n").unwrap();
        assert_eq!(c.list("prime").unwrap(), Some(vec![3, 5]));
        assert_eq!(c.get::<u64>("cond-max").unwrap(), Some(500));
        assert_eq!(c.get::<u64>("order").unwrap(), None);
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("prime").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0,2, 4-6").unwrap(), vec![0, 2, 4, 5, 6]);
        assert!(parse_list("x").is_err());
    }
}
