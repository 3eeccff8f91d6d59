//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names with `_` or `-`. A flag given on the command line wins over
//! the file, and the file wins over the built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const KNOWN_KEYS: &[&str] = &[
    "out_dir",
    "threads",
    "seed",
    // prepare
    "nominal_3m_kind",
    "nominal_10y_kind",
    "cpi_kind",
    "date_column",
    "value_column",
    "long_window_years",
    "min_years",
    // estimate
    "bias_correction",
    "replicates",
    "steps_per_year",
    "damping",
    "tolerance",
    "max_iterations",
    "blocks",
    "max_lag",
    "match_long_std",
    // curve
    "points",
    "tau_min",
    "tau_max",
    "r0",
    // simulate
    "reps",
    "years",
    "short_maturity",
    "long_maturity",
    "long_target_std",
    "long_corr",
    "initial_rate",
    "bin_lower",
    "bin_upper",
    "bin_width",
    "series",
];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", i + 1));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", i + 1));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key} = '{v}': {e}"))),
        }
    }

    /// Flag value, else config value, else `default`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// A boolean switch whose command-line form can only turn the feature
    /// off (`--no-...`).
    pub fn switch(&self, disabled_by_flag: bool, key: &str, default: bool) -> CliResult<bool> {
        if disabled_by_flag {
            return Ok(false);
        }
        Ok(self.get(key)?.unwrap_or(default))
    }
}
