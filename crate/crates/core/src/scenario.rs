//! Scenario final demand: thirteen spending categories, a sector concordance,
//! household-budget aggregation and proportional per-category scaling.
//!
//! Consumption (households, non-profits and government, consolidated) is
//! sorted into twelve categories through the concordance. Gross fixed capital
//! formation is the thirteenth category and lives in its own demand vector,
//! scaled as a whole.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};
use core::str::FromStr;

use crate::algebra::DemandVector;
use crate::error::{Error, Result};
use crate::model::RegionSectorIndex;

/// 365.25 / 7.
pub const DEFAULT_CALENDAR_WEEKS: f64 = 365.25 / 7.0;

/// Share of a grocery budget that is really dining out.
pub const DINING_OUT_FRACTION: f64 = 0.116;

/// Depreciation as a share of GDP used for a maintenance-only GFCF target.
pub const DEPRECIATION_RATE: f64 = 0.135;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpendingCategory {
    Groceries,
    Clothing,
    Housing,
    UtilitiesInsurance,
    Healthcare,
    Appliances,
    Education,
    Devices,
    Transport,
    PublicAdministration,
    Recreation,
    CareWork,
    Gfcf,
}

impl SpendingCategory {
    pub const ALL: [SpendingCategory; 13] = [
        SpendingCategory::Groceries,
        SpendingCategory::Clothing,
        SpendingCategory::Housing,
        SpendingCategory::UtilitiesInsurance,
        SpendingCategory::Healthcare,
        SpendingCategory::Appliances,
        SpendingCategory::Education,
        SpendingCategory::Devices,
        SpendingCategory::Transport,
        SpendingCategory::PublicAdministration,
        SpendingCategory::Recreation,
        SpendingCategory::CareWork,
        SpendingCategory::Gfcf,
    ];

    /// The twelve categories reachable through the sector concordance.
    pub const CONSUMPTION: [SpendingCategory; 12] = [
        SpendingCategory::Groceries,
        SpendingCategory::Clothing,
        SpendingCategory::Housing,
        SpendingCategory::UtilitiesInsurance,
        SpendingCategory::Healthcare,
        SpendingCategory::Appliances,
        SpendingCategory::Education,
        SpendingCategory::Devices,
        SpendingCategory::Transport,
        SpendingCategory::PublicAdministration,
        SpendingCategory::Recreation,
        SpendingCategory::CareWork,
    ];

    pub fn position(self) -> usize {
        self as usize
    }

    /// Full display label.
    pub fn label(self) -> &'static str {
        match self {
            SpendingCategory::Groceries => "Groceries (food and drinks)",
            SpendingCategory::Clothing => "Clothing",
            SpendingCategory::Housing => "Housing",
            SpendingCategory::UtilitiesInsurance => "Utilities and insurance",
            SpendingCategory::Healthcare => "Healthcare",
            SpendingCategory::Appliances => "Appliances, furnishing, and maintenance",
            SpendingCategory::Education => "Education",
            SpendingCategory::Devices => "Devices (TVs, phones, computers)",
            SpendingCategory::Transport => "Transport",
            SpendingCategory::PublicAdministration => "Public administration and defence",
            SpendingCategory::Recreation => "Recreation (vacations, toys, dining out)",
            SpendingCategory::CareWork => "Care work (babysitters, senior care)",
            SpendingCategory::Gfcf => "Gross fixed capital formation",
        }
    }

    /// Short machine key used in data files.
    pub fn key(self) -> &'static str {
        match self {
            SpendingCategory::Groceries => "groceries",
            SpendingCategory::Clothing => "clothing",
            SpendingCategory::Housing => "housing",
            SpendingCategory::UtilitiesInsurance => "utilities",
            SpendingCategory::Healthcare => "healthcare",
            SpendingCategory::Appliances => "appliances",
            SpendingCategory::Education => "education",
            SpendingCategory::Devices => "devices",
            SpendingCategory::Transport => "transport",
            SpendingCategory::PublicAdministration => "public_administration",
            SpendingCategory::Recreation => "recreation",
            SpendingCategory::CareWork => "care_work",
            SpendingCategory::Gfcf => "gfcf",
        }
    }
}

impl fmt::Display for SpendingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SpendingCategory {
    type Err = Error;

    /// Accepts either the machine key or the full label.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        SpendingCategory::ALL
            .into_iter()
            .find(|c| c.key().eq_ignore_ascii_case(s) || c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownCategory(s.into()))
    }
}

/// One value per spending category.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CategoryTotals([f64; 13]);

impl CategoryTotals {
    pub fn zeros() -> Self {
        CategoryTotals([0.0; 13])
    }

    pub fn from_array(values: [f64; 13]) -> Self {
        CategoryTotals(values)
    }

    pub fn as_array(&self) -> &[f64; 13] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpendingCategory, f64)> + '_ {
        SpendingCategory::ALL.into_iter().zip(self.0.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Index<SpendingCategory> for CategoryTotals {
    type Output = f64;

    fn index(&self, c: SpendingCategory) -> &f64 {
        &self.0[c.position()]
    }
}

impl IndexMut<SpendingCategory> for CategoryTotals {
    fn index_mut(&mut self, c: SpendingCategory) -> &mut f64 {
        &mut self.0[c.position()]
    }
}

/// Sector name to spending category. Sectors absent from the mapping are unsorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryConcordance {
    mapping: BTreeMap<String, SpendingCategory>,
    unsorted: BTreeSet<String>,
}

impl CategoryConcordance {
    pub fn new<I>(sectors: &[String], pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, SpendingCategory)>,
    {
        let known: BTreeSet<&str> = sectors.iter().map(String::as_str).collect();
        let mut mapping = BTreeMap::new();
        for (sector, category) in pairs {
            if !known.contains(sector.as_str()) {
                return Err(Error::InvalidConcordance(format!(
                    "sector `{sector}` is not in the table"
                )));
            }
            if category == SpendingCategory::Gfcf {
                return Err(Error::InvalidConcordance(format!(
                    "sector `{sector}` mapped to GFCF; GFCF is carried by its own demand vector"
                )));
            }
            if mapping.insert(sector.clone(), category).is_some() {
                return Err(Error::InvalidConcordance(format!("sector `{sector}` listed twice")));
            }
        }
        let unsorted = sectors.iter().filter(|s| !mapping.contains_key(*s)).cloned().collect();
        Ok(CategoryConcordance { mapping, unsorted })
    }

    pub fn category(&self, sector: &str) -> Option<SpendingCategory> {
        self.mapping.get(sector).copied()
    }

    pub fn mapping(&self) -> &BTreeMap<String, SpendingCategory> {
        &self.mapping
    }

    pub fn unsorted(&self) -> &BTreeSet<String> {
        &self.unsorted
    }

    /// Category of every flat region-sector position; `None` when unsorted.
    pub fn per_position(&self, index: &RegionSectorIndex) -> Vec<Option<SpendingCategory>> {
        let by_sector: Vec<Option<SpendingCategory>> = index.sectors().iter().map(|s| self.category(s)).collect();
        (0..index.dim()).map(|i| by_sector[index.sector_of(i)]).collect()
    }
}

/// Weekly budgets per household type.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HouseholdBudgetTable {
    rows: BTreeMap<String, CategoryTotals>,
}

impl HouseholdBudgetTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, household_type: impl Into<String>, weekly: CategoryTotals) -> Result<()> {
        if let Some((c, v)) = weekly.iter().find(|(_, v)| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weekly budget for {} must be nonnegative, got {v}",
                c.key()
            )));
        }
        self.rows.insert(household_type.into(), weekly);
        Ok(())
    }

    pub fn household_types(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }
}

/// `total[c] = Σ_type budget[type][c] · count[type] · weeks_per_year`.
pub fn aggregate_household_budgets(
    table: &HouseholdBudgetTable,
    counts: &BTreeMap<String, f64>,
    weeks_per_year: f64,
) -> Result<CategoryTotals> {
    if !(weeks_per_year > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weeks per year must be positive, got {weeks_per_year}"
        )));
    }
    let mut totals = CategoryTotals::zeros();
    for (household_type, budget) in &table.rows {
        let count = *counts
            .get(household_type)
            .ok_or_else(|| Error::MissingHouseholdType(household_type.clone()))?;
        for (c, weekly) in budget.iter() {
            totals[c] += weekly * count * weeks_per_year;
        }
    }
    Ok(totals)
}

/// Per-category sums of a consumption vector. The GFCF entry is always zero
/// because no sector maps to it.
pub fn baseline_category_totals(
    demand: &DemandVector,
    concordance: &CategoryConcordance,
    index: &RegionSectorIndex,
) -> Result<CategoryTotals> {
    if demand.len() != index.dim() {
        return Err(Error::DimensionMismatch {
            context: "demand vs index",
            expected: index.dim(),
            found: demand.len(),
        });
    }
    let positions = concordance.per_position(index);
    let mut totals = CategoryTotals::zeros();
    for (i, (&value, category)) in demand.as_slice().iter().zip(&positions).enumerate() {
        match category {
            Some(c) => totals[*c] += value,
            None if value != 0.0 => {
                let (region, sector) = index.labels(i);
                return Err(Error::UnsortedNonzeroDemand {
                    sector: sector.into(),
                    region: region.into(),
                    value,
                });
            }
            None => {}
        }
    }
    Ok(totals)
}

/// `factor[c] = target[c] / baseline[c]`; a category with zero baseline and
/// zero target keeps factor 1.
pub fn category_scaling_factors(baseline: &CategoryTotals, targets: &CategoryTotals) -> Result<CategoryTotals> {
    let mut factors = CategoryTotals::zeros();
    for c in SpendingCategory::ALL {
        let (base, target) = (baseline[c], targets[c]);
        if !(target >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target for {} must be nonnegative, got {target}",
                c.key()
            )));
        }
        factors[c] = if base > 0.0 {
            target / base
        } else if target == 0.0 {
            1.0
        } else {
            return Err(Error::ZeroBaselineNonzeroTarget(c.key()));
        };
    }
    Ok(factors)
}

/// Scales `base` so that it sums to `target_total`.
pub fn scale_gfcf(base: &DemandVector, target_total: f64) -> Result<DemandVector> {
    if !(target_total >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "GFCF target must be nonnegative, got {target_total}"
        )));
    }
    let base_total = base.total();
    if base_total > 0.0 {
        base.scaled(target_total / base_total)
    } else if target_total == 0.0 {
        Ok(DemandVector::zeros(base.len()))
    } else {
        Err(Error::ZeroBaseNonzeroTarget(target_total))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CofogEntry {
    pub function: String,
    pub spending: f64,
    pub included: bool,
}

/// Government spending by function with scenario inclusion flags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CofogTable {
    pub entries: Vec<CofogEntry>,
}

/// `Σ included / Σ all` over the table.
pub fn government_factor(cofog: &CofogTable) -> Result<f64> {
    let mut included = 0.0;
    let mut all = 0.0;
    for e in &cofog.entries {
        if !(e.spending >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spending for `{}` must be nonnegative, got {}",
                e.function, e.spending
            )));
        }
        all += e.spending;
        if e.included {
            included += e.spending;
        }
    }
    if all > 0.0 {
        Ok(included / all)
    } else {
        Err(Error::EmptyCofogTable)
    }
}

/// Maintenance-only capital formation: `gdp · rate`.
pub fn gfcf_depreciation_target(gdp: f64, rate: f64) -> Result<f64> {
    if !(gdp > 0.0) {
        return Err(Error::InvalidParameter(format!("GDP must be positive, got {gdp}")));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "depreciation rate must lie in (0, 1), got {rate}"
        )));
    }
    Ok(gdp * rate)
}

/// Splits a food budget into what stays and what is dining out. The two parts
/// always add back to `food_total` exactly: whichever part is at least half is
/// computed by multiplication and the other by an exact (Sterbenz) subtraction.
pub fn dining_out_adjustment(food_total: f64, fraction: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "dining-out fraction must lie in [0, 1], got {fraction}"
        )));
    }
    if fraction <= 0.5 {
        let reduced = food_total * (1.0 - fraction);
        Ok((reduced, food_total - reduced))
    } else {
        let moved = food_total * fraction;
        Ok((food_total - moved, moved))
    }
}

/// A budget move applied to resolved targets before scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetAdjustment {
    /// Remove `fraction` of `from`; add it to `to` when given.
    MoveFraction {
        from: SpendingCategory,
        to: Option<SpendingCategory>,
        fraction: f64,
    },
}

impl BudgetAdjustment {
    pub fn dining_out(moved_to: Option<SpendingCategory>) -> Self {
        BudgetAdjustment::MoveFraction {
            from: SpendingCategory::Groceries,
            to: moved_to,
            fraction: DINING_OUT_FRACTION,
        }
    }

    pub fn apply(&self, totals: &mut CategoryTotals) -> Result<()> {
        match *self {
            BudgetAdjustment::MoveFraction { from, to, fraction } => {
                let (kept, moved) = dining_out_adjustment(totals[from], fraction)?;
                totals[from] = kept;
                if let Some(to) = to {
                    totals[to] += moved;
                }
            }
        }
        Ok(())
    }
}

/// How a scenario sets its category totals.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioTargets {
    /// Keep the home region's recorded spending.
    Baseline,
    /// Annual totals per category. Public administration may be left out when
    /// a government factor supplies it.
    Explicit(BTreeMap<SpendingCategory, f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub home_region: Option<String>,
    pub targets: ScenarioTargets,
    /// Public administration target as a share of its baseline.
    pub government_factor: Option<f64>,
    pub adjustments: Vec<BudgetAdjustment>,
}

impl ScenarioSpec {
    pub fn baseline(name: impl Into<String>) -> Self {
        ScenarioSpec {
            name: name.into(),
            home_region: None,
            targets: ScenarioTargets::Baseline,
            government_factor: None,
            adjustments: Vec::new(),
        }
    }

    pub fn explicit(name: impl Into<String>, totals: &CategoryTotals) -> Self {
        ScenarioSpec {
            name: name.into(),
            home_region: None,
            targets: ScenarioTargets::Explicit(totals.iter().collect()),
            government_factor: None,
            adjustments: Vec::new(),
        }
    }

    /// Final category targets given the baseline totals (GFCF included).
    pub fn resolve_targets(&self, baseline: &CategoryTotals) -> Result<CategoryTotals> {
        let pa = SpendingCategory::PublicAdministration;
        if let Some(f) = self.government_factor {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!(
                    "government factor must lie in [0, 1], got {f}"
                )));
            }
        }
        let mut totals = match &self.targets {
            ScenarioTargets::Baseline => *baseline,
            ScenarioTargets::Explicit(map) => {
                let mut totals = CategoryTotals::zeros();
                for c in SpendingCategory::ALL {
                    match (map.get(&c), self.government_factor) {
                        (Some(_), Some(_)) if c == pa => return Err(Error::ConflictingTarget(c.key())),
                        (Some(&v), _) => {
                            if !(v >= 0.0) {
                                return Err(Error::InvalidParameter(format!(
                                    "target for {} must be nonnegative, got {v}",
                                    c.key()
                                )));
                            }
                            totals[c] = v;
                        }
                        (None, Some(_)) if c == pa => {}
                        (None, _) => return Err(Error::MissingCategoryTarget(c.key())),
                    }
                }
                totals
            }
        };
        if let Some(f) = self.government_factor {
            totals[pa] = baseline[pa] * f;
        }
        for adjustment in &self.adjustments {
            adjustment.apply(&mut totals)?;
        }
        Ok(totals)
    }
}

/// Scaled demand for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDemand {
    pub consumption: DemandVector,
    pub gfcf: DemandVector,
    pub baseline: CategoryTotals,
    pub targets: CategoryTotals,
    pub factors: CategoryTotals,
}

impl ScenarioDemand {
    pub fn combined(&self) -> DemandVector {
        self.consumption
            .add(&self.gfcf)
            .expect("scenario vectors share one dimension")
    }

    /// One demand vector per category; together they partition the combined vector.
    pub fn by_category(
        &self,
        concordance: &CategoryConcordance,
        index: &RegionSectorIndex,
    ) -> Vec<(SpendingCategory, DemandVector)> {
        decompose_by_category(&self.consumption, &self.gfcf, concordance, index)
    }
}

/// Splits consumption by concordance category and appends GFCF as the
/// thirteenth part.
pub fn decompose_by_category(
    consumption: &DemandVector,
    gfcf: &DemandVector,
    concordance: &CategoryConcordance,
    index: &RegionSectorIndex,
) -> Vec<(SpendingCategory, DemandVector)> {
    let positions = concordance.per_position(index);
    let mut parts: Vec<(SpendingCategory, DemandVector)> = SpendingCategory::CONSUMPTION
        .into_iter()
        .map(|c| {
            let values = consumption
                .as_slice()
                .iter()
                .zip(&positions)
                .map(|(&v, p)| if *p == Some(c) { v } else { 0.0 })
                .collect();
            (
                c,
                DemandVector::new(values).expect("entries copied from a valid vector"),
            )
        })
        .collect();
    parts.push((SpendingCategory::Gfcf, gfcf.clone()));
    parts
}

/// Multiplies every sector's consumption by its category factor and rescales GFCF.
pub fn apply_scenario(
    consumption_base: &DemandVector,
    gfcf_base: &DemandVector,
    concordance: &CategoryConcordance,
    index: &RegionSectorIndex,
    spec: &ScenarioSpec,
) -> Result<ScenarioDemand> {
    if gfcf_base.len() != consumption_base.len() {
        return Err(Error::DimensionMismatch {
            context: "GFCF vs consumption",
            expected: consumption_base.len(),
            found: gfcf_base.len(),
        });
    }
    let mut baseline = baseline_category_totals(consumption_base, concordance, index)?;
    baseline[SpendingCategory::Gfcf] = gfcf_base.total();
    let targets = spec.resolve_targets(&baseline)?;
    let factors = category_scaling_factors(&baseline, &targets)?;

    let positions = concordance.per_position(index);
    let scaled: Vec<f64> = consumption_base
        .as_slice()
        .iter()
        .zip(&positions)
        .map(|(&v, p)| match p {
            Some(c) => v * factors[*c],
            None => v,
        })
        .collect();
    let gfcf = scale_gfcf(gfcf_base, targets[SpendingCategory::Gfcf])?;
    Ok(ScenarioDemand {
        consumption: DemandVector::new(scaled)?,
        gfcf,
        baseline,
        targets,
        factors,
    })
}
