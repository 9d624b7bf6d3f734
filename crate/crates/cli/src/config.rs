//! Conversion parameters, scenario specs and concordance files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use mrio_core::indicators::{
    ConversionParams, SectorGroupConcordance, DEFAULT_WEEKS_WORKED, DEFAULT_WORKING_LIFE_SHARE,
};
use mrio_core::model::RegionSectorIndex;
use mrio_core::scenario::{
    aggregate_household_budgets, gfcf_depreciation_target, government_factor, BudgetAdjustment, CategoryConcordance,
    CategoryTotals, CofogEntry, CofogTable, HouseholdBudgetTable, ScenarioSpec, ScenarioTargets, SpendingCategory,
    DEFAULT_CALENDAR_WEEKS, DEPRECIATION_RATE, DINING_OUT_FRACTION,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::layout::read_toml;
use crate::tables::{parse_number, read_records};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default = "default_weeks")]
    pub weeks_worked_per_year: f64,
    #[serde(default = "default_share")]
    pub working_life_share: f64,
    #[serde(default = "default_calendar")]
    pub calendar_weeks: f64,
    pub regions: BTreeMap<String, Population>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub working_age_population: f64,
    pub total_population: f64,
}

fn default_weeks() -> f64 {
    DEFAULT_WEEKS_WORKED
}

fn default_share() -> f64 {
    DEFAULT_WORKING_LIFE_SHARE
}

fn default_calendar() -> f64 {
    DEFAULT_CALENDAR_WEEKS
}

impl ParamsFile {
    pub fn load(path: &Path) -> Result<Self> {
        read_toml(path)
    }

    pub fn for_region(&self, region: &str, path: &Path) -> Result<ConversionParams> {
        let pop = self
            .regions
            .get(region)
            .ok_or_else(|| CliError::parse(path, format!("no population for region `{region}`")))?;
        let params = ConversionParams {
            weeks_worked_per_year: self.weeks_worked_per_year,
            working_life_share: self.working_life_share,
            working_age_population: pop.working_age_population,
            total_population: pop.total_population,
            calendar_weeks: self.calendar_weeks,
        };
        params.validate().map_err(|e| CliError::data(path, e))?;
        Ok(params)
    }
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home_region: Option<String>,
    pub kind: ScenarioKind,
    /// Annual totals keyed by category key, in the table's monetary unit.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub targets: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub government_factor: Option<f64>,
    /// Government spending by function with inclusion flags; yields the government factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofog: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub households: Option<HouseholdSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gfcf_depreciation: Option<Depreciation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjustments: Vec<AdjustmentFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Baseline,
    Targets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HouseholdSource {
    /// Columns: household_type, category, weekly.
    pub budgets: PathBuf,
    /// Columns: household_type, count.
    pub counts: PathBuf,
    #[serde(default = "default_calendar")]
    pub weeks_per_year: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Depreciation {
    pub gdp: f64,
    #[serde(default = "default_depreciation")]
    pub rate: f64,
}

fn default_depreciation() -> f64 {
    DEPRECIATION_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdjustmentFile {
    /// Moves a share of one category's target to another (or drops it).
    MoveFraction {
        from: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to: Option<String>,
        fraction: f64,
    },
    /// Groceries lose the eating-out share; it goes to `to` when given.
    DiningOut {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fraction: Option<f64>,
    },
}

/// A scenario spec resolved against its own directory.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub path: PathBuf,
    pub spec: ScenarioSpec,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let file: ScenarioFile = read_toml(path)?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { root.join(p) };
    let category = |key: &str| -> Result<SpendingCategory> { key.parse().map_err(|e| CliError::data(path, e)) };

    let mut targets: BTreeMap<SpendingCategory, f64> = BTreeMap::new();
    let mut set = |c: SpendingCategory, v: f64, source: &str| -> Result<()> {
        if targets.insert(c, v).is_some() {
            return Err(CliError::parse(
                path,
                format!("target for `{}` given twice ({source})", c.key()),
            ));
        }
        Ok(())
    };
    for (key, v) in &file.targets {
        set(category(key)?, *v, "targets")?;
    }
    if let Some(h) = &file.households {
        let (table, counts) = read_households(&resolve(&h.budgets), &resolve(&h.counts))?;
        let covered: BTreeSet<SpendingCategory> = table.1;
        let totals =
            aggregate_household_budgets(&table.0, &counts, h.weeks_per_year).map_err(|e| CliError::data(path, e))?;
        for c in covered {
            set(c, totals[c], "household budgets")?;
        }
    }
    if let Some(d) = file.gfcf_depreciation {
        let v = gfcf_depreciation_target(d.gdp, d.rate).map_err(|e| CliError::data(path, e))?;
        set(SpendingCategory::Gfcf, v, "gfcf_depreciation")?;
    }

    let government_factor = match (file.government_factor, &file.cofog) {
        (Some(_), Some(_)) => {
            return Err(CliError::parse(
                path,
                "give either government_factor or cofog, not both",
            ))
        }
        (Some(f), None) => Some(f),
        (None, Some(p)) => Some(government_factor(&read_cofog(&resolve(p))?).map_err(|e| CliError::data(path, e))?),
        (None, None) => None,
    };

    let targets = match file.kind {
        ScenarioKind::Baseline if !targets.is_empty() => {
            return Err(CliError::parse(path, "a baseline scenario takes no category targets"))
        }
        ScenarioKind::Baseline => ScenarioTargets::Baseline,
        ScenarioKind::Targets => ScenarioTargets::Explicit(targets),
    };
    let adjustments = file
        .adjustments
        .iter()
        .map(|a| {
            Ok(match a {
                AdjustmentFile::MoveFraction { from, to, fraction } => BudgetAdjustment::MoveFraction {
                    from: category(from)?,
                    to: to.as_deref().map(category).transpose()?,
                    fraction: *fraction,
                },
                AdjustmentFile::DiningOut { to, fraction } => BudgetAdjustment::MoveFraction {
                    from: SpendingCategory::Groceries,
                    to: to.as_deref().map(category).transpose()?,
                    fraction: fraction.unwrap_or(DINING_OUT_FRACTION),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let spec = ScenarioSpec {
        name: file.name.clone(),
        home_region: file.home_region.clone(),
        targets,
        government_factor,
        adjustments,
    };
    Ok(LoadedScenario {
        file,
        path: path.to_path_buf(),
        spec,
    })
}

/// Scenario file for explicit totals, as written by the fixture command.
pub fn scenario_file_from_totals(name: &str, totals: &CategoryTotals) -> ScenarioFile {
    ScenarioFile {
        name: name.into(),
        description: None,
        home_region: None,
        kind: ScenarioKind::Targets,
        targets: totals.iter().map(|(c, v)| (c.key().to_string(), v)).collect(),
        government_factor: None,
        cofog: None,
        households: None,
        gfcf_depreciation: None,
        adjustments: Vec::new(),
    }
}

type Households = (
    (HouseholdBudgetTable, BTreeSet<SpendingCategory>),
    BTreeMap<String, f64>,
);

fn read_households(budgets: &Path, counts: &Path) -> Result<Households> {
    let mut weekly: BTreeMap<String, CategoryTotals> = BTreeMap::new();
    let mut covered = BTreeSet::new();
    for row in read_records(budgets, b',', 3)? {
        let c: SpendingCategory = row[1].parse().map_err(|e| CliError::data(budgets, e))?;
        let v = number(budgets, &row[2])?;
        weekly.entry(row[0].clone()).or_insert_with(CategoryTotals::zeros)[c] += v;
        covered.insert(c);
    }
    let mut table = HouseholdBudgetTable::new();
    for (t, b) in weekly {
        table.insert(t, b).map_err(|e| CliError::data(budgets, e))?;
    }
    let mut count_map = BTreeMap::new();
    for row in read_records(counts, b',', 2)? {
        count_map.insert(row[0].clone(), number(counts, &row[1])?);
    }
    Ok(((table, covered), count_map))
}

pub fn read_cofog(path: &Path) -> Result<CofogTable> {
    let entries = read_records(path, b',', 3)?
        .into_iter()
        .map(|row| {
            Ok(CofogEntry {
                function: row[0].clone(),
                spending: number(path, &row[1])?,
                included: flag(path, &row[2])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CofogTable { entries })
}

fn number(path: &Path, cell: &str) -> Result<f64> {
    parse_number(cell).ok_or_else(|| CliError::parse(path, format!("not a number: `{cell}`")))
}

fn flag(path: &Path, cell: &str) -> Result<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "y" => Ok(true),
        "false" | "no" | "0" | "n" => Ok(false),
        _ => Err(CliError::parse(path, format!("not a yes/no flag: `{cell}`"))),
    }
}

/// Concordance entries naming sectors absent from the table are dropped and reported.
#[derive(Debug, Clone)]
pub struct LoadedConcordance {
    pub concordance: CategoryConcordance,
    pub skipped: Vec<String>,
}

/// Columns: sector, category (key or label).
pub fn read_category_concordance(path: &Path, index: &RegionSectorIndex) -> Result<LoadedConcordance> {
    let known: BTreeSet<&str> = index.sectors().iter().map(String::as_str).collect();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for row in read_records(path, b',', 2)? {
        if !known.contains(row[0].as_str()) {
            skipped.push(row[0].clone());
            continue;
        }
        let c: SpendingCategory = row[1].parse().map_err(|e| CliError::data(path, e))?;
        pairs.push((row[0].clone(), c));
    }
    let concordance = CategoryConcordance::new(index.sectors(), pairs).map_err(|e| CliError::data(path, e))?;
    Ok(LoadedConcordance { concordance, skipped })
}

/// Columns: sector, group. Groups keep their order of first appearance.
pub fn read_sector_groups(path: &Path, index: &RegionSectorIndex) -> Result<SectorGroupConcordance> {
    let known: BTreeSet<&str> = index.sectors().iter().map(String::as_str).collect();
    let mut labels: Vec<String> = Vec::new();
    let mut pairs = Vec::new();
    for row in read_records(path, b',', 2)? {
        if !labels.contains(&row[1]) {
            labels.push(row[1].clone());
        }
        if known.contains(row[0].as_str()) {
            pairs.push((row[0].clone(), row[1].clone()));
        }
    }
    SectorGroupConcordance::new(labels, pairs).map_err(|e| CliError::data(path, e))
}
