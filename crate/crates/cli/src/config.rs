//! Plain-text `key = value` run configuration. Flags override file values;
//! resolved settings are embedded in every output artifact.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
    consumed: RefCell<HashSet<String>>,
    path: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig {
            values,
            consumed: RefCell::new(HashSet::new()),
            path: Some(path.display().to_string()),
        })
    }

    /// Look a key up and parse it; flag values take precedence at the call
    /// sites, so this is only consulted when the flag is absent.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.consumed.borrow_mut().insert(key.to_string());
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::usage(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }

    /// Comma-separated list variant of [`FileConfig::get`].
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.consumed.borrow_mut().insert(key.to_string());
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim().parse::<T>().map_err(|_| {
                        CliError::usage(format!("config key `{key}`: cannot parse `{item}`"))
                    })
                })
                .collect::<Result<Vec<T>, CliError>>()
                .map(Some),
        }
    }

    /// Reject unknown keys so typos do not silently fall back to defaults.
    pub fn finish(&self) -> Result<(), CliError> {
        let consumed = self.consumed.borrow();
        let mut unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !consumed.contains(*k))
            .collect();
        unknown.sort();
        if let Some(first) = unknown.first() {
            return Err(CliError::usage(format!(
                "{}: unknown config key `{first}`",
                self.path.as_deref().unwrap_or("config")
            )));
        }
        Ok(())
    }
}

/// Flag value if present, else config-file value, else the default.
pub fn resolve<T: FromStr + Clone>(
    flag: &Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    Ok(flag
        .clone()
        .or(file.get::<T>(key)?)
        .unwrap_or(default))
}

/// As [`resolve`] but without a default; `None` when unset everywhere.
pub fn resolve_opt<T: FromStr + Clone>(
    flag: &Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>, CliError> {
    Ok(flag.clone().or(file.get::<T>(key)?))
}
