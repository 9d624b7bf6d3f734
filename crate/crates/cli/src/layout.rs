//! The layout descriptor: a TOML file naming the table files of one MRIO
//! dataset and how to read them. Relative paths resolve against the
//! descriptor's own directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_HOURS_PER_WORKER_YEAR: f64 = 1840.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub name: String,
    pub year: i32,
    pub monetary_unit: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home_region: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_dir: Option<PathBuf>,
    pub tables: TablePaths,
    #[serde(default)]
    pub concordances: ConcordancePaths,
    #[serde(default)]
    pub extensions: Vec<ExtensionLayout>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quirks: Vec<Quirk>,
}

fn default_delimiter() -> String {
    "comma".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablePaths {
    pub z: PathBuf,
    pub y: PathBuf,
    pub x: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcordancePaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_groups: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionLayout {
    pub name: String,
    pub kind: String,
    pub path: PathBuf,
    /// Unit of the values after scaling.
    pub unit: String,
    /// Rows to keep, in this order. All rows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stressors: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Values are thousands of persons employed; convert to hours.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub persons_to_hours: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hours_per_worker_year: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_flags: Option<BTreeMap<String, String>>,
}

impl ExtensionLayout {
    /// Multiplier applied to every value read from the files.
    pub fn factor(&self) -> Result<f64> {
        let scale = self.scale.unwrap_or(1.0);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CliError::Config(format!(
                "extension `{}`: scale must be positive, got {scale}",
                self.name
            )));
        }
        if !self.persons_to_hours {
            return Ok(scale);
        }
        let hours = self.hours_per_worker_year.unwrap_or(DEFAULT_HOURS_PER_WORKER_YEAR);
        if !(hours.is_finite() && hours > 0.0) {
            return Err(CliError::Config(format!(
                "extension `{}`: hours per worker-year must be positive, got {hours}",
                self.name
            )));
        }
        Ok(scale * 1000.0 * hours)
    }
}

/// A known data problem for one region-sector, surfaced as an ingest warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quirk {
    pub region: String,
    pub sector: String,
    pub message: String,
}

/// A parsed layout plus the directory its relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLayout {
    pub layout: Layout,
    pub path: PathBuf,
    pub root: PathBuf,
}

impl LoadedLayout {
    pub fn load(path: &Path) -> Result<Self> {
        let layout: Layout = read_toml(path)?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedLayout {
            layout,
            path: path.to_path_buf(),
            root,
        })
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        if relative.is_absolute() {
            relative.to_path_buf()
        } else {
            self.root.join(relative)
        }
    }
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| CliError::parse(path, e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(persons: bool, hours: Option<f64>) -> ExtensionLayout {
        ExtensionLayout {
            name: "labour".into(),
            kind: "labour".into(),
            path: "f.csv".into(),
            unit: "hours".into(),
            stressors: None,
            scale: None,
            persons_to_hours: persons,
            hours_per_worker_year: hours,
            direct: None,
            material_flags: None,
        }
    }

    #[test]
    fn persons_convert_with_default_hours() {
        assert_eq!(ext(false, None).factor().unwrap(), 1.0);
        assert_eq!(ext(true, None).factor().unwrap(), 1_840_000.0);
        assert_eq!(ext(true, Some(1600.0)).factor().unwrap(), 1_600_000.0);
        assert!(ext(true, Some(0.0)).factor().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"
            name = "t"
            year = 2012
            monetary_unit = "M.EUR"
            colour = "blue"
            [tables]
            z = "z.csv"
            y = "y.csv"
            x = "x.csv"
        "#;
        assert!(toml::from_str::<Layout>(text).is_err());
    }
}
