//! Scenario files.
//!
//! A scenario is a TOML file holding either a complete `[system]` table or
//! a `base` path to another scenario, then partial `[overrides]`, an
//! optional `[sweep]` and any number of `[[variants]]`, each a label plus
//! more overrides. Keys are exactly the [`SystemConfig`] field names.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use noma_outage::error::{Error, Result};
use noma_outage::link::SystemConfig;

use crate::sweep::SweepSection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Path of the base scenario, relative to this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub overrides: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    #[serde(flatten)]
    pub overrides: toml::Table,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// A scenario with its base chain and overrides resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub config: SystemConfig,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_chain(path, 0)
    }

    fn load_chain(path: &Path, depth: usize) -> Result<Self> {
        if depth > 16 {
            return Err(Error::Parse(format!("{}: base chain too deep", path.display())));
        }
        let file = ScenarioFile::read(path)?;
        let start = match (&file.system, &file.base) {
            (Some(system), None) => system.clone(),
            (None, Some(base)) => {
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
                Self::load_chain(&dir.join(base), depth + 1)?.config
            }
            _ => {
                return Err(Error::Parse(format!(
                    "{}: a scenario needs exactly one of [system] or base",
                    path.display()
                )))
            }
        };
        let config = apply_overrides(&start, &file.overrides)?;
        Ok(Self { file, config })
    }

    /// `(label, config)` per variant, or the scenario itself when it has
    /// none. Labels are `id` or `id/label`.
    pub fn series(&self) -> Result<Vec<(String, SystemConfig)>> {
        if self.file.variants.is_empty() {
            return Ok(vec![(self.file.id.clone(), self.config.clone())]);
        }
        self.file
            .variants
            .iter()
            .map(|v| Ok((format!("{}/{}", self.file.id, v.label), apply_overrides(&self.config, &v.overrides)?)))
            .collect()
    }
}

/// Overlays `overrides` on `config`. Unknown keys and ill-typed values are
/// parse errors; the result is not semantically validated.
pub fn apply_overrides(config: &SystemConfig, overrides: &toml::Table) -> Result<SystemConfig> {
    if overrides.is_empty() {
        return Ok(config.clone());
    }
    let mut table = toml::Table::try_from(config).map_err(|e| Error::Parse(e.to_string()))?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    table.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
}

/// Parses `key=value` assignments (values in TOML syntax) into a table.
pub fn parse_assignments<S: AsRef<str>>(items: &[S]) -> Result<toml::Table> {
    let mut table = toml::Table::new();
    for item in items {
        let item = item.as_ref();
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{item}` is not key=value")))?;
        let parsed: toml::Table = format!("v = {}", value.trim())
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(format!("override `{item}`: {e}")))?;
        table.insert(key.trim().to_string(), parsed["v"].clone());
    }
    Ok(table)
}
