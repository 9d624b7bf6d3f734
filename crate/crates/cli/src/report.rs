//! Report files: per-cell CSV, a TOML run summary, comparison tables and
//! plot-ready data series.

use std::path::Path;

use mrio_core::indicators::{compare_report, ConversionParams, FootprintReport};
use mrio_core::model::ExtensionKind;
use mrio_core::scenario::ScenarioDemand;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::ingest::{FileProvenance, IngestWarning};
use crate::layout::write_toml;
use crate::tables::{format_number, write_records, write_text};

pub const FOOTPRINT_HEADER: [&str; 6] = ["scenario", "extension", "dimension", "label", "value", "unit"];
pub const COMPARISON_HEADER: [&str; 8] = [
    "scenario",
    "extension",
    "dimension",
    "label",
    "value",
    "share",
    "delta",
    "unit",
];

pub fn write_footprint_csv(path: &Path, reports: &[FootprintReport]) -> Result<()> {
    let rows = reports.iter().flat_map(|r| {
        r.cells().into_iter().map(move |c| {
            vec![
                r.scenario.clone(),
                r.extension_name.clone(),
                c.dimension.to_string(),
                c.label,
                format_number(c.value),
                c.unit,
            ]
        })
    });
    write_records(path, b',', &FOOTPRINT_HEADER, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub home_region: String,
    pub dataset: DatasetInfo,
    pub params: ParamsInfo,
    pub concordance: ConcordanceInfo,
    pub categories: Vec<CategoryInfo>,
    pub extensions: Vec<ExtensionSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<IngestWarning>,
    pub provenance: Vec<FileProvenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub year: i32,
    pub monetary_unit: String,
    pub regions: usize,
    pub sectors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsInfo {
    pub weeks_worked_per_year: f64,
    pub working_life_share: f64,
    pub working_age_population: f64,
    pub total_population: f64,
    /// Calendar weeks used when annual totals are built from weekly averages.
    pub calendar_weeks: f64,
}

impl From<&ConversionParams> for ParamsInfo {
    fn from(p: &ConversionParams) -> Self {
        ParamsInfo {
            weeks_worked_per_year: p.weeks_worked_per_year,
            working_life_share: p.working_life_share,
            working_age_population: p.working_age_population,
            total_population: p.total_population,
            calendar_weeks: p.calendar_weeks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceInfo {
    pub unsorted_sectors: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries_not_in_table: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryInfo {
    pub key: String,
    pub label: String,
    pub baseline: f64,
    pub target: f64,
    pub factor: f64,
}

pub fn category_info(demand: &ScenarioDemand) -> Vec<CategoryInfo> {
    demand
        .baseline
        .iter()
        .map(|(c, base)| CategoryInfo {
            key: c.key().into(),
            label: c.label().into(),
            baseline: base,
            target: demand.targets[c],
            factor: demand.factors[c],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionSummary {
    pub name: String,
    pub kind: String,
    pub unit: String,
    pub total: f64,
    pub per_capita: f64,
    pub domestic: f64,
    pub imported: f64,
    pub import_share: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hours_week_equivalent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_use: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mf: Option<f64>,
    pub max_partition_error: f64,
}

impl From<&FootprintReport> for ExtensionSummary {
    fn from(r: &FootprintReport) -> Self {
        ExtensionSummary {
            name: r.extension_name.clone(),
            kind: r.kind.label().into(),
            unit: r.unit.clone(),
            total: r.total,
            per_capita: r.per_capita,
            domestic: r.by_origin.domestic,
            imported: r.by_origin.imported,
            import_share: if r.total == 0.0 {
                0.0
            } else {
                r.by_origin.imported / r.total
            },
            hours_week_equivalent: r.hours_week_equivalent,
            direct_use: r.direct_use,
            tmc: r.material.map(|m| m.tmc),
            mf: r.material.map(|m| m.mf),
            max_partition_error: r.max_partition_error(),
        }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    write_toml(path, summary)
}

/// Comparison rows for every extension, extensions in first-seen order.
pub fn write_comparison_csv(path: &Path, reports: &[FootprintReport]) -> Result<()> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.extension_name.as_str()) {
            names.push(&r.extension_name);
        }
    }
    let mut rows = Vec::new();
    for name in names {
        let group: Vec<FootprintReport> = reports.iter().filter(|r| r.extension_name == name).cloned().collect();
        for row in compare_report(&group)?.rows {
            rows.push(vec![
                row.scenario,
                row.extension,
                row.dimension.to_string(),
                row.label,
                format_number(row.value),
                row.share.map(format_number).unwrap_or_default(),
                format_number(row.delta),
                row.unit,
            ]);
        }
    }
    write_records(path, b',', &COMPARISON_HEADER, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub figure: String,
    pub title: String,
    pub extension: String,
    pub unit: String,
    pub bars: Vec<PlotBar>,
    pub metadata: PlotMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotBar {
    pub scenario: String,
    pub total: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotMetadata {
    pub scenarios: Vec<String>,
    pub home_region: String,
    pub params: ParamsInfo,
    /// Per-person equivalents of each bar total, in `per_person_unit`.
    pub per_person: Vec<f64>,
    pub per_person_unit: String,
}

type Segments = fn(&FootprintReport) -> Vec<Segment>;

fn by_category(r: &FootprintReport) -> Vec<Segment> {
    r.by_category
        .iter()
        .map(|(c, v)| Segment {
            label: c.label().into(),
            value: v,
        })
        .collect()
}

fn by_origin(r: &FootprintReport) -> Vec<Segment> {
    vec![
        Segment {
            label: "domestic".into(),
            value: r.by_origin.domestic,
        },
        Segment {
            label: "imported".into(),
            value: r.by_origin.imported,
        },
    ]
}

fn by_sector_group(r: &FootprintReport) -> Vec<Segment> {
    r.by_sector_group
        .iter()
        .map(|(l, v)| Segment {
            label: l.clone(),
            value: *v,
        })
        .collect()
}

fn by_skill(r: &FootprintReport) -> Vec<Segment> {
    let s = r.by_skill.unwrap_or_default();
    [("low", s.low), ("medium", s.medium), ("high", s.high)]
        .into_iter()
        .map(|(l, v)| Segment {
            label: l.into(),
            value: v,
        })
        .collect()
}

fn series(figure: &str, title: &str, reports: &[&FootprintReport], segments: Segments) -> PlotSeries {
    let first = reports[0];
    let per_person_unit = if first.kind == ExtensionKind::Labour {
        "hours/week equivalent".to_string()
    } else {
        format!("{}/person/year", first.unit)
    };
    PlotSeries {
        figure: figure.into(),
        title: title.into(),
        extension: first.extension_name.clone(),
        unit: first.unit.clone(),
        bars: reports
            .iter()
            .map(|r| PlotBar {
                scenario: r.scenario.clone(),
                total: r.total,
                segments: segments(r),
            })
            .collect(),
        metadata: PlotMetadata {
            scenarios: reports.iter().map(|r| r.scenario.clone()).collect(),
            home_region: first.home_region.clone(),
            params: (&first.params).into(),
            per_person: reports
                .iter()
                .map(|r| r.hours_week_equivalent.unwrap_or(r.per_capita))
                .collect(),
            per_person_unit,
        },
    }
}

/// Figure analogues: labour by category, origin, sector group and skill
/// (fig1 to fig4) and every other extension by category (fig5).
pub fn plot_series(reports: &[FootprintReport]) -> Vec<PlotSeries> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.extension_name.as_str()) {
            names.push(&r.extension_name);
        }
    }
    let mut out = Vec::new();
    for name in names {
        let group: Vec<&FootprintReport> = reports.iter().filter(|r| r.extension_name == name).collect();
        if group[0].kind == ExtensionKind::Labour {
            out.push(series(
                "fig1",
                "Labour footprint by spending category",
                &group,
                by_category,
            ));
            out.push(series("fig2", "Labour footprint by origin", &group, by_origin));
            out.push(series(
                "fig3",
                "Labour footprint by sector group",
                &group,
                by_sector_group,
            ));
            if group.iter().all(|r| r.by_skill.is_some()) {
                out.push(series("fig4", "Labour footprint by skill level", &group, by_skill));
            }
        } else {
            let title = format!("{} footprint by spending category", group[0].extension_name);
            out.push(series("fig5", &title, &group, by_category));
        }
    }
    out
}

pub fn write_plots(path: &Path, series: &[PlotSeries]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(series).map_err(|e| CliError::parse(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}
