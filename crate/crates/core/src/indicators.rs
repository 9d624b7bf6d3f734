//! Reported indicators: hours-per-week equivalents, per-capita values, and
//! footprint disaggregations by origin, sector group, skill and spending category.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::algebra::{footprint_by_source, IntensityVector, LeontiefOperator};
use crate::error::{Error, Result};
use crate::model::{ExtensionAccount, ExtensionKind, MrioAccount, RegionSectorIndex};
use crate::scenario::{CategoryConcordance, CategoryTotals, ScenarioDemand, SpendingCategory, DEFAULT_CALENDAR_WEEKS};

/// Statutory leave of 5.6 weeks subtracted from a calendar year, as a round figure.
pub const DEFAULT_WEEKS_WORKED: f64 = 46.6;

/// Forty working years out of fifty.
pub const DEFAULT_WORKING_LIFE_SHARE: f64 = 0.8;

/// Seven broad producing-sector groups.
pub const DEFAULT_SECTOR_GROUPS: [&str; 7] = [
    "Agriculture",
    "Mining and quarrying",
    "Manufacturing",
    "Utilities",
    "Construction",
    "Transport and trade",
    "Services",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionParams {
    pub weeks_worked_per_year: f64,
    pub working_life_share: f64,
    /// Persons aged 15–64.
    pub working_age_population: f64,
    pub total_population: f64,
    /// Used only when building annual totals from weekly averages.
    pub calendar_weeks: f64,
}

impl ConversionParams {
    pub fn new(working_age_population: f64, total_population: f64) -> Self {
        ConversionParams {
            weeks_worked_per_year: DEFAULT_WEEKS_WORKED,
            working_life_share: DEFAULT_WORKING_LIFE_SHARE,
            working_age_population,
            total_population,
            calendar_weeks: DEFAULT_CALENDAR_WEEKS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (
                self.weeks_worked_per_year > 0.0 && self.weeks_worked_per_year <= 52.2,
                "weeks worked per year must lie in (0, 52.2]",
            ),
            (
                self.working_life_share > 0.0 && self.working_life_share <= 1.0,
                "working-life share must lie in (0, 1]",
            ),
            (
                self.working_age_population > 0.0,
                "working-age population must be positive",
            ),
            (self.total_population > 0.0, "total population must be positive"),
            (self.calendar_weeks > 0.0, "calendar weeks must be positive"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidParameter((*msg).into())),
            None => Ok(()),
        }
    }
}

/// `H = hours / (weeks worked · working-age population · working-life share)`.
pub fn hours_per_week_equivalent(total_annual_hours: f64, params: &ConversionParams) -> Result<f64> {
    params.validate()?;
    Ok(total_annual_hours / (params.weeks_worked_per_year * params.working_age_population * params.working_life_share))
}

/// Annual hours from an average weekly figure spread over calendar weeks.
pub fn annual_hours_from_weekly_average(weekly_hours_per_person: f64, population: f64, calendar_weeks: f64) -> f64 {
    weekly_hours_per_person * population * calendar_weeks
}

pub fn per_capita(total: f64, population: f64) -> Result<f64> {
    if !(population > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "population must be positive, got {population}"
        )));
    }
    Ok(total / population)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OriginSplit {
    pub domestic: f64,
    pub imported: f64,
}

impl OriginSplit {
    pub fn total(&self) -> f64 {
        self.domestic + self.imported
    }
}

/// Domestic part is the home region's block of producing sectors.
pub fn split_origin(by_source: &[f64], home_region: &str, index: &RegionSectorIndex) -> Result<OriginSplit> {
    check_dim(index, by_source.len())?;
    let home = index.region_position(home_region)?;
    let block = index.region_block(home);
    let mut split = OriginSplit::default();
    for (i, v) in by_source.iter().enumerate() {
        if block.contains(&i) {
            split.domestic += v;
        } else {
            split.imported += v;
        }
    }
    Ok(split)
}

/// Sector name to group label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorGroupConcordance {
    labels: Vec<String>,
    mapping: BTreeMap<String, usize>,
}

impl SectorGroupConcordance {
    /// Groups appear in the order of `labels`; each pair names a listed label.
    pub fn new<I>(labels: Vec<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut mapping = BTreeMap::new();
        for (sector, group) in pairs {
            let position = labels
                .iter()
                .position(|l| *l == group)
                .ok_or_else(|| Error::InvalidConcordance(format!("unknown sector group `{group}`")))?;
            if mapping.insert(sector.clone(), position).is_some() {
                return Err(Error::InvalidConcordance(format!("sector `{sector}` listed twice")));
            }
        }
        Ok(SectorGroupConcordance { labels, mapping })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn group_of(&self, sector: &str) -> Option<&str> {
        self.mapping.get(sector).map(|&g| self.labels[g].as_str())
    }

    pub fn mapping(&self) -> impl Iterator<Item = (&str, &str)> {
        self.mapping.iter().map(|(s, &g)| (s.as_str(), self.labels[g].as_str()))
    }
}

pub fn aggregate_by_sector_group(
    by_source: &[f64],
    groups: &SectorGroupConcordance,
    index: &RegionSectorIndex,
) -> Result<Vec<(String, f64)>> {
    check_dim(index, by_source.len())?;
    let per_sector: Vec<usize> = index
        .sectors()
        .iter()
        .map(|s| {
            groups
                .mapping
                .get(s)
                .copied()
                .ok_or_else(|| Error::UnmappedSector(s.clone()))
        })
        .collect::<Result<_>>()?;
    let mut totals = vec![0.0; groups.labels.len()];
    for (i, v) in by_source.iter().enumerate() {
        totals[per_sector[index.sector_of(i)]] += v;
    }
    Ok(groups.labels.iter().cloned().zip(totals).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skill {
    Low,
    Medium,
    High,
}

/// Reads gender and skill out of labour stressor labels such as
/// `Employment hours: Low-skilled female`.
pub fn parse_labour_stressor(label: &str) -> Option<(Gender, Skill)> {
    let lower = label.to_ascii_lowercase();
    let gender = if lower.contains("female") {
        Gender::Female
    } else if lower.contains("male") {
        Gender::Male
    } else {
        return None;
    };
    let skill = if lower.contains("low") {
        Skill::Low
    } else if lower.contains("medium") || lower.contains("middle") {
        Skill::Medium
    } else if lower.contains("high") {
        Skill::High
    } else {
        return None;
    };
    Some((gender, skill))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SkillSplit {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl SkillSplit {
    pub fn total(&self) -> f64 {
        self.low + self.medium + self.high
    }
}

/// Sums per-stressor labour footprints over genders. All six gender × skill
/// combinations must be present.
pub fn aggregate_by_skill(labour_by_stressor: &[(&str, f64)]) -> Result<SkillSplit> {
    let mut seen = [[false; 3]; 2];
    let mut split = SkillSplit::default();
    for (label, value) in labour_by_stressor {
        let (gender, skill) = parse_labour_stressor(label)
            .ok_or_else(|| Error::MissingStressorLabel(format!("gender and skill in `{label}`")))?;
        seen[gender as usize][skill as usize] = true;
        match skill {
            Skill::Low => split.low += value,
            Skill::Medium => split.medium += value,
            Skill::High => split.high += value,
        }
    }
    for (g, gender) in ["female", "male"].iter().enumerate() {
        for (s, skill) in ["low", "medium", "high"].iter().enumerate() {
            if !seen[g][s] {
                return Err(Error::MissingStressorLabel(format!("{gender} {skill}-skilled")));
            }
        }
    }
    Ok(split)
}

/// Footprint driven by each category's share of demand; one solve per category.
pub fn attribute_by_category(
    operator: &LeontiefOperator,
    intensity: &IntensityVector,
    parts: &[(SpendingCategory, crate::algebra::DemandVector)],
) -> Result<CategoryTotals> {
    let mut totals = CategoryTotals::zeros();
    for (category, demand) in parts {
        if demand.as_slice().iter().all(|v| *v == 0.0) {
            continue;
        }
        let output = operator.solve(demand.as_slice())?;
        totals[*category] += footprint_by_source(intensity, &output)?.iter().sum::<f64>();
    }
    Ok(totals)
}

/// `direct_base · embedded_scenario / embedded_base`.
pub fn direct_use_scaled(direct_base: f64, embedded_scenario: f64, embedded_base: f64) -> Result<f64> {
    if !(embedded_base > 0.0) {
        return Err(Error::ZeroEmbeddedBase);
    }
    Ok(direct_base * (embedded_scenario / embedded_base))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialUse {
    Used,
    Unused,
}

impl MaterialUse {
    pub fn label(self) -> &'static str {
        match self {
            MaterialUse::Used => "used",
            MaterialUse::Unused => "unused",
        }
    }
}

impl FromStr for MaterialUse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "used" => Ok(MaterialUse::Used),
            "unused" => Ok(MaterialUse::Unused),
            _ => Err(Error::InvalidParameter(format!(
                "material flag must be used or unused, got `{s}`"
            ))),
        }
    }
}

/// Used/unused flag per material stressor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaterialFlags(BTreeMap<String, MaterialUse>);

impl MaterialFlags {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, flag: MaterialUse) {
        self.0.insert(label.into(), flag);
    }

    pub fn get(&self, label: &str) -> Result<MaterialUse> {
        self.0
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnflaggedStressor(label.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, MaterialUse)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, MaterialUse)> for MaterialFlags {
    fn from_iter<T: IntoIterator<Item = (String, MaterialUse)>>(iter: T) -> Self {
        MaterialFlags(iter.into_iter().collect())
    }
}

/// Total material consumption and material footprint (used extraction only).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaterialIndicators {
    pub tmc: f64,
    pub mf: f64,
}

pub fn material_indicators(material_by_stressor: &[(&str, f64)], flags: &MaterialFlags) -> Result<MaterialIndicators> {
    let mut out = MaterialIndicators::default();
    for (label, value) in material_by_stressor {
        match flags.get(label)? {
            MaterialUse::Used => {
                out.mf += value;
                out.tmc += value;
            }
            MaterialUse::Unused => out.tmc += value,
        }
    }
    Ok(out)
}

/// Gross output for a scenario's combined demand and for each category's part.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutputs {
    pub total: Vec<f64>,
    pub by_category: Vec<(SpendingCategory, Vec<f64>)>,
}

pub fn solve_scenario(
    operator: &LeontiefOperator,
    demand: &ScenarioDemand,
    concordance: &CategoryConcordance,
    index: &RegionSectorIndex,
) -> Result<ScenarioOutputs> {
    let total = operator.solve(demand.combined().as_slice())?;
    let by_category = demand
        .by_category(concordance, index)
        .into_iter()
        .map(|(c, part)| {
            let q = if part.as_slice().iter().all(|v| *v == 0.0) {
                vec![0.0; part.len()]
            } else {
                operator.solve(part.as_slice())?
            };
            Ok((c, q))
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioOutputs { total, by_category })
}

/// Everything a report needs besides the extension and the solved outputs.
#[derive(Debug, Clone, Copy)]
pub struct ReportContext<'a> {
    pub account: &'a MrioAccount,
    pub scenario: &'a str,
    pub home_region: &'a str,
    pub params: &'a ConversionParams,
    pub sector_groups: &'a SectorGroupConcordance,
    pub output_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootprintReport {
    pub scenario: String,
    pub extension_name: String,
    pub kind: ExtensionKind,
    pub unit: String,
    pub home_region: String,
    /// Embedded footprint, excluding direct use.
    pub total: f64,
    pub per_capita: f64,
    pub hours_week_equivalent: Option<f64>,
    pub by_origin: OriginSplit,
    pub by_sector_group: Vec<(String, f64)>,
    pub by_skill: Option<SkillSplit>,
    pub by_category: CategoryTotals,
    pub direct_use: Option<f64>,
    pub material: Option<MaterialIndicators>,
    pub params: ConversionParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub dimension: &'static str,
    pub label: String,
    pub value: f64,
    pub unit: String,
}

impl FootprintReport {
    /// Dimensions whose cells partition the embedded total.
    pub const PARTITIONS: [&'static str; 4] = ["origin", "sector_group", "skill", "category"];

    /// Flat rows in a fixed order.
    pub fn cells(&self) -> Vec<ReportCell> {
        let unit = &self.unit;
        let mut cells = Vec::new();
        let mut push = |dimension: &'static str, label: &str, value: f64, unit: String| {
            cells.push(ReportCell {
                dimension,
                label: label.into(),
                value,
                unit,
            })
        };
        push("total", "embedded", self.total, unit.clone());
        push("per_capita", "embedded", self.per_capita, format!("{unit}/person/year"));
        if let Some(h) = self.hours_week_equivalent {
            push("hours_week_equivalent", "embedded", h, "hours/week".into());
        }
        push("origin", "domestic", self.by_origin.domestic, unit.clone());
        push("origin", "imported", self.by_origin.imported, unit.clone());
        for (label, v) in &self.by_sector_group {
            push("sector_group", label, *v, unit.clone());
        }
        if let Some(skill) = &self.by_skill {
            push("skill", "low", skill.low, unit.clone());
            push("skill", "medium", skill.medium, unit.clone());
            push("skill", "high", skill.high, unit.clone());
        }
        for (c, v) in self.by_category.iter() {
            push("category", c.label(), v, unit.clone());
        }
        if let Some(d) = self.direct_use {
            push("direct_use", "direct", d, unit.clone());
            push(
                "direct_use_per_capita",
                "direct",
                d / self.params.total_population,
                format!("{unit}/person/year"),
            );
        }
        if let Some(m) = &self.material {
            push("material", "tmc", m.tmc, unit.clone());
            push("material", "mf", m.mf, unit.clone());
        }
        cells
    }

    /// Largest relative gap between the total and the sum of any partition.
    pub fn max_partition_error(&self) -> f64 {
        let mut sums = vec![self.by_origin.total()];
        sums.push(self.by_sector_group.iter().map(|(_, v)| v).sum());
        if let Some(s) = &self.by_skill {
            sums.push(s.total());
        }
        sums.push(self.by_category.total());
        let scale = self.total.abs().max(f64::MIN_POSITIVE);
        sums.iter().map(|s| (s - self.total).abs() / scale).fold(0.0, f64::max)
    }
}

/// Builds the report(s) for one extension. Material accounts with flags yield a
/// second report named `<name>-mf` restricted to used extraction.
pub fn build_reports(
    ctx: &ReportContext<'_>,
    extension: &ExtensionAccount,
    outputs: &ScenarioOutputs,
    baseline_outputs: &ScenarioOutputs,
) -> Result<Vec<FootprintReport>> {
    ctx.params.validate()?;
    let all_rows: Vec<usize> = (0..extension.stressors.len()).collect();
    let mut reports = vec![build_one(
        ctx,
        extension,
        &extension.name,
        &all_rows,
        outputs,
        baseline_outputs,
    )?];
    if let (ExtensionKind::Material, Some(flags)) = (extension.kind, &extension.material_flags) {
        let used: Vec<usize> = all_rows
            .iter()
            .copied()
            .filter(|&r| flags.get(&extension.stressors[r]) == Ok(MaterialUse::Used))
            .collect();
        let name = format!("{}-mf", extension.name);
        reports.push(build_one(ctx, extension, &name, &used, outputs, baseline_outputs)?);
    }
    Ok(reports)
}

fn build_one(
    ctx: &ReportContext<'_>,
    extension: &ExtensionAccount,
    name: &str,
    rows: &[usize],
    outputs: &ScenarioOutputs,
    baseline_outputs: &ScenarioOutputs,
) -> Result<FootprintReport> {
    let account = ctx.account;
    let index = account.index();
    let x = account.output();
    let row_intensities: Vec<IntensityVector> = rows
        .iter()
        .map(|&r| {
            crate::algebra::intensity(
                &extension.stressors[r],
                &extension.unit,
                extension.rows.row(r),
                x,
                ctx.output_epsilon,
            )
        })
        .collect::<Result<_>>()?;
    let summed = IntensityVector::sum(
        name,
        &extension.unit,
        index.dim(),
        row_intensities.iter().map(|s| s.values.as_slice()),
    )?;

    let by_source = footprint_by_source(&summed, &outputs.total)?;
    let total: f64 = by_source.iter().sum();
    let by_origin = split_origin(&by_source, ctx.home_region, index)?;
    let by_sector_group = aggregate_by_sector_group(&by_source, ctx.sector_groups, index)?;

    let mut by_category = CategoryTotals::zeros();
    for (c, q) in &outputs.by_category {
        by_category[*c] += footprint_by_source(&summed, q)?.iter().sum::<f64>();
    }

    let per_row: Vec<(&str, f64)> = row_intensities
        .iter()
        .zip(rows)
        .map(|(s, &r)| {
            let v: f64 = footprint_by_source(s, &outputs.total)?.iter().sum();
            Ok((extension.stressors[r].as_str(), v))
        })
        .collect::<Result<_>>()?;

    let (hours_week_equivalent, by_skill) = if extension.kind == ExtensionKind::Labour {
        (
            Some(hours_per_week_equivalent(total, ctx.params)?),
            Some(aggregate_by_skill(&per_row)?),
        )
    } else {
        (None, None)
    };

    let direct_use = match (&extension.direct, extension.kind.has_direct_use()) {
        (Some(direct), true) => {
            let home = index.region_position(ctx.home_region)?;
            let direct_base: f64 = rows.iter().map(|&r| direct[(r, home)]).sum();
            let embedded_base: f64 = footprint_by_source(&summed, &baseline_outputs.total)?.iter().sum();
            Some(direct_use_scaled(direct_base, total, embedded_base)?)
        }
        _ => None,
    };

    let material = match (&extension.material_flags, extension.kind) {
        (Some(flags), ExtensionKind::Material) if rows.len() == extension.stressors.len() => {
            Some(material_indicators(&per_row, flags)?)
        }
        _ => None,
    };

    Ok(FootprintReport {
        scenario: ctx.scenario.into(),
        extension_name: name.into(),
        kind: extension.kind,
        unit: extension.unit.clone(),
        home_region: ctx.home_region.into(),
        total,
        per_capita: per_capita(total, ctx.params.total_population)?,
        hours_week_equivalent,
        by_origin,
        by_sector_group,
        by_skill,
        by_category,
        direct_use,
        material,
        params: *ctx.params,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scenario: String,
    pub extension: String,
    pub dimension: &'static str,
    pub label: String,
    pub value: f64,
    /// Share of the report total, for partition dimensions.
    pub share: Option<f64>,
    /// Difference from the first report's matching cell.
    pub delta: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Aligns reports for one extension, in input order.
pub fn compare_report(reports: &[FootprintReport]) -> Result<ComparisonTable> {
    let Some(first) = reports.first() else {
        return Ok(ComparisonTable::default());
    };
    for r in &reports[1..] {
        if r.extension_name != first.extension_name {
            return Err(Error::UnitMismatch {
                expected: first.extension_name.clone(),
                found: r.extension_name.clone(),
            });
        }
        if r.unit != first.unit {
            return Err(Error::UnitMismatch {
                expected: first.unit.clone(),
                found: r.unit.clone(),
            });
        }
    }
    let reference: BTreeMap<(&'static str, String), f64> = first
        .cells()
        .into_iter()
        .map(|c| ((c.dimension, c.label), c.value))
        .collect();
    let mut rows = Vec::new();
    for report in reports {
        for cell in report.cells() {
            let share = FootprintReport::PARTITIONS.contains(&cell.dimension).then(|| {
                if report.total == 0.0 {
                    0.0
                } else {
                    cell.value / report.total
                }
            });
            let base = reference
                .get(&(cell.dimension, cell.label.clone()))
                .copied()
                .unwrap_or(0.0);
            rows.push(ComparisonRow {
                scenario: report.scenario.clone(),
                extension: report.extension_name.clone(),
                dimension: cell.dimension,
                label: cell.label,
                value: cell.value,
                share,
                delta: cell.value - base,
                unit: cell.unit,
            });
        }
    }
    Ok(ComparisonTable { rows })
}

fn check_dim(index: &RegionSectorIndex, found: usize) -> Result<()> {
    if index.dim() == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: "per-source contributions",
            expected: index.dim(),
            found,
        })
    }
}
