//! Flat `key = value` configuration files merged under command-line flags.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    /// Directory of the config file; relative paths in it resolve here.
    base: Option<PathBuf>,
    used: RefCell<BTreeSet<String>>,
}

fn normalise(key: &str) -> String {
    key.trim().to_lowercase().replace('_', "-")
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut s = Self::parse(&text).with_context(|| format!("config {}", path.display()))?;
        s.base = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            if values.insert(normalise(k), v.trim().to_string()).is_some() {
                bail!("line {}: `{}` set twice", i + 1, k.trim());
            }
        }
        Ok(Self {
            values,
            ..Self::default()
        })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    /// The flag if given, else the parsed config value, else `None`.
    pub fn opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("config key `{key}`: bad value `{v}`: {e}"))
            })
            .transpose()
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, set: bool) -> Result<bool> {
        self.get(key, set.then_some(true), false)
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        let from_file = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        Ok(from_file.map(|v| match &self.base {
            Some(base) if Path::new(v).is_relative() => base.join(v),
            _ => PathBuf::from(v),
        }))
    }

    pub fn require_path(&self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        self.path(key, flag)?
            .ok_or_else(|| anyhow!("missing --{key} (flag or config key)"))
    }

    /// Rejects config keys the command never asked for.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if !unknown.is_empty() {
            bail!(
                "unknown config key(s) for this command: {}",
                unknown.join(", ")
            );
        }
        Ok(())
    }
}
