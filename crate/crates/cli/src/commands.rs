//! The four verbs: validate, footprint, compare and fixture.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mrio_core::algebra::{
    productivity_check, LeontiefOperator, PowerIterationConfig, SpectralRadius, DEFAULT_OUTPUT_EPSILON,
};
use mrio_core::fixture::{fixture, fixture_concordance, fixture_sector_groups};
use mrio_core::indicators::{
    build_reports, solve_scenario, ConversionParams, FootprintReport, ReportContext, SectorGroupConcordance,
};
use mrio_core::model::{select_demand, validate_balance, BalanceReport, DemandSelection, DEFAULT_BALANCE_TOLERANCE};
use mrio_core::scenario::{apply_scenario, ScenarioDemand, ScenarioSpec, SpendingCategory};
use serde::Serialize;

use crate::config::{
    load_scenario, read_category_concordance, read_sector_groups, scenario_file_from_totals, LoadedConcordance,
    LoadedScenario, ParamsFile, Population, ScenarioKind,
};
use crate::error::{CliError, Result};
use crate::ingest::{digest_file, load_account, write_account, Ingested, LayoutExtras};
use crate::layout::{write_toml, ConcordancePaths};
use crate::report::{
    category_info, plot_series, write_comparison_csv, write_footprint_csv, write_plots, write_summary, ConcordanceInfo,
    DatasetInfo, ExtensionSummary, PlotSeries, Summary,
};
use crate::tables::write_records;

/// Everything a footprint or compare run needs, resolved from flags and the layout.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub layout: PathBuf,
    /// Scenario file paths, or names looked up in the layout's scenario directory.
    pub scenarios: Vec<String>,
    pub extensions: Option<Vec<String>>,
    pub home_region: Option<String>,
    pub params: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dataset: String,
    pub balance_tolerance: f64,
    pub max_relative_imbalance: f64,
    pub imbalanced_rows: Vec<ImbalancedRow>,
    pub spectral_radius: Option<f64>,
    pub spectral_lower: Option<f64>,
    pub spectral_upper: Option<f64>,
    pub productive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub productivity_error: Option<String>,
    pub hawkins_simon_violations: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalancedRow {
    pub region: String,
    pub sector: String,
    pub output: f64,
    pub residual: f64,
    pub relative: f64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.imbalanced_rows.is_empty() && self.productive
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset: {}", self.dataset);
        let _ = writeln!(
            s,
            "balance: max relative residual {:e} (tolerance {:e}), {} row(s) flagged",
            self.max_relative_imbalance,
            self.balance_tolerance,
            self.imbalanced_rows.len()
        );
        for r in &self.imbalanced_rows {
            let _ = writeln!(
                s,
                "  {} / {}: output {} residual {} relative {:e}",
                r.region, r.sector, r.output, r.residual, r.relative
            );
        }
        match (self.spectral_radius, &self.productivity_error) {
            (Some(rho), _) => {
                let _ = writeln!(
                    s,
                    "spectral radius: {rho:.6} in [{:.6}, {:.6}], {}",
                    self.spectral_lower.unwrap_or(rho),
                    self.spectral_upper.unwrap_or(rho),
                    if self.productive {
                        "productive"
                    } else {
                        "NOT productive"
                    }
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "spectral radius: {e}");
            }
            (None, None) => {}
        }
        if !self.hawkins_simon_violations.is_empty() {
            let _ = writeln!(s, "column sums >= 1: {}", self.hawkins_simon_violations.join(", "));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "{}", if self.is_clean() { "clean" } else { "VALIDATION FAILED" });
        s
    }
}

fn balance_tolerance(ingested: &Ingested) -> f64 {
    ingested
        .layout
        .layout
        .balance_tolerance
        .unwrap_or(DEFAULT_BALANCE_TOLERANCE)
}

pub fn validate_account(ingested: &Ingested) -> Result<ValidationReport> {
    let account = &ingested.account;
    let index = account.index();
    let balance: BalanceReport = validate_balance(account, balance_tolerance(ingested));
    let coefficients = account.technical_coefficients(DEFAULT_OUTPUT_EPSILON)?;
    let (spectral, error): (Option<SpectralRadius>, Option<String>) =
        match productivity_check(&coefficients, PowerIterationConfig::default()) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let hawkins_simon_violations = coefficients
        .hawkins_simon_violations()
        .into_iter()
        .map(|j| {
            let (r, s) = index.labels(j);
            format!("{r}/{s}")
        })
        .collect();
    Ok(ValidationReport {
        dataset: ingested.layout.layout.name.clone(),
        balance_tolerance: balance.tolerance,
        max_relative_imbalance: balance.max_relative,
        imbalanced_rows: balance
            .violations
            .iter()
            .map(|v| ImbalancedRow {
                region: v.region.clone(),
                sector: v.sector.clone(),
                output: v.output,
                residual: v.residual,
                relative: v.relative,
            })
            .collect(),
        spectral_radius: spectral.map(|r| r.estimate),
        spectral_lower: spectral.map(|r| r.lower),
        spectral_upper: spectral.map(|r| r.upper),
        productive: spectral.is_some_and(|r| r.productive),
        productivity_error: error,
        hawkins_simon_violations,
        warnings: ingested
            .warnings
            .iter()
            .map(|w| format!("{} / {}: {}", w.region, w.sector, w.message))
            .collect(),
    })
}

/// Ingests and checks a dataset. Writes `validation.toml` into `out` when given.
pub fn cmd_validate(layout: &Path, out: Option<&Path>) -> Result<ValidationReport> {
    let ingested = load_account(layout)?;
    let report = validate_account(&ingested)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_toml(&dir.join("validation.toml"), &report)?;
    }
    Ok(report)
}

/// A dataset ready for scenario runs: validated, factorized, with concordances.
pub struct Prepared {
    pub ingested: Ingested,
    pub params_file: ParamsFile,
    pub params_path: PathBuf,
    pub concordance: LoadedConcordance,
    pub sector_groups: SectorGroupConcordance,
    pub operator: LeontiefOperator,
    pub extensions: Vec<usize>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let ingested = load_account(&cfg.layout)?;
    let layout = &ingested.layout;
    let params_path = cfg
        .params
        .clone()
        .or_else(|| layout.layout.params.as_ref().map(|p| layout.resolve(p)))
        .ok_or_else(|| {
            CliError::Config("no conversion parameters: pass --params or set `params` in the layout".into())
        })?;
    let params_file = ParamsFile::load(&params_path)?;
    let index = ingested.account.index();
    let categories = layout
        .layout
        .concordances
        .categories
        .as_ref()
        .ok_or_else(|| CliError::Config("layout names no category concordance".into()))?;
    let concordance = read_category_concordance(&layout.resolve(categories), index)?;
    let groups = layout
        .layout
        .concordances
        .sector_groups
        .as_ref()
        .ok_or_else(|| CliError::Config("layout names no sector-group concordance".into()))?;
    let sector_groups = read_sector_groups(&layout.resolve(groups), index)?;

    let balance = validate_balance(&ingested.account, balance_tolerance(&ingested));
    if !balance.is_balanced() {
        let v = &balance.violations[0];
        return Err(CliError::ValidationFailed(format!(
            "{} row(s) out of balance, first {} / {} (relative {:e})",
            balance.violations.len(),
            v.region,
            v.sector,
            v.relative
        )));
    }
    let operator = LeontiefOperator::factorize(ingested.account.technical_coefficients(DEFAULT_OUTPUT_EPSILON)?)
        .map_err(|e| match e {
            mrio_core::Error::UnproductiveEconomy(m) => CliError::ValidationFailed(m),
            other => other.into(),
        })?;

    let all = ingested.account.extensions();
    let extensions = match &cfg.extensions {
        None => (0..all.len()).collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                all.iter()
                    .position(|e| &e.name == n)
                    .ok_or_else(|| CliError::Core(mrio_core::Error::UnknownExtension(n.clone())))
            })
            .collect::<Result<_>>()?,
    };
    Ok(Prepared {
        ingested,
        params_file,
        params_path,
        concordance,
        sector_groups,
        operator,
        extensions,
    })
}

/// Resolves a scenario argument to a spec file.
pub fn resolve_scenario(arg: &str, prepared: &Prepared) -> Result<LoadedScenario> {
    let direct = PathBuf::from(arg);
    if direct.is_file() {
        return load_scenario(&direct);
    }
    let layout = &prepared.ingested.layout;
    if let Some(dir) = &layout.layout.scenario_dir {
        let candidate = layout.resolve(dir).join(format!("{arg}.toml"));
        if candidate.is_file() {
            return load_scenario(&candidate);
        }
    }
    Err(CliError::UnknownScenario(arg.into()))
}

pub struct ScenarioRun {
    pub scenario: LoadedScenario,
    pub home_region: String,
    pub params: ConversionParams,
    pub demand: ScenarioDemand,
    pub reports: Vec<FootprintReport>,
}

pub fn run_scenario(cfg: &RunConfig, prepared: &Prepared, scenario: LoadedScenario) -> Result<ScenarioRun> {
    let account = &prepared.ingested.account;
    let index = account.index();
    let home = cfg
        .home_region
        .clone()
        .or_else(|| scenario.spec.home_region.clone())
        .or_else(|| prepared.ingested.layout.layout.home_region.clone())
        .ok_or_else(|| {
            CliError::Config("no home region: pass --home-region or set it in the scenario or layout".into())
        })?;
    let params = prepared.params_file.for_region(&home, &prepared.params_path)?;
    let selected = select_demand(account, &DemandSelection::consumption_and_gfcf(&home))?;
    let gfcf = selected.gfcf.expect("GFCF is kept apart by this selection");
    let concordance = &prepared.concordance.concordance;
    let wrap = |e: mrio_core::Error| CliError::data(&scenario.path, e);

    let base_demand = apply_scenario(
        &selected.consumption,
        &gfcf,
        concordance,
        index,
        &ScenarioSpec::baseline("baseline"),
    )
    .map_err(wrap)?;
    let demand = apply_scenario(&selected.consumption, &gfcf, concordance, index, &scenario.spec).map_err(wrap)?;
    let base_outputs = solve_scenario(&prepared.operator, &base_demand, concordance, index)?;
    let outputs = solve_scenario(&prepared.operator, &demand, concordance, index)?;

    let ctx = ReportContext {
        account,
        scenario: &scenario.spec.name,
        home_region: &home,
        params: &params,
        sector_groups: &prepared.sector_groups,
        output_epsilon: DEFAULT_OUTPUT_EPSILON,
    };
    let mut reports = Vec::new();
    for &e in &prepared.extensions {
        reports.extend(build_reports(&ctx, &account.extensions()[e], &outputs, &base_outputs)?);
    }
    Ok(ScenarioRun {
        scenario,
        home_region: home,
        params,
        demand,
        reports,
    })
}

fn scenario_dir(out: &Path, name: &str) -> Result<PathBuf> {
    if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
        return Err(CliError::Config(format!(
            "scenario name `{name}` cannot be used as a directory name"
        )));
    }
    Ok(out.join(name))
}

fn write_run(prepared: &Prepared, run: &ScenarioRun, out: &Path) -> Result<PathBuf> {
    let dir = scenario_dir(out, &run.scenario.spec.name)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_footprint_csv(&dir.join("footprint.csv"), &run.reports)?;

    let ingested = &prepared.ingested;
    let account = &ingested.account;
    let mut provenance = ingested.provenance.clone();
    provenance.push(digest_file(
        "scenario",
        Path::new(run.scenario.path.file_name().unwrap_or_default()),
        &run.scenario.path,
    )?);
    let summary = Summary {
        scenario: run.scenario.spec.name.clone(),
        home_region: run.home_region.clone(),
        dataset: DatasetInfo {
            name: ingested.layout.layout.name.clone(),
            year: account.year(),
            monetary_unit: account.monetary_unit().into(),
            regions: account.index().regions().len(),
            sectors: account.index().sectors().len(),
        },
        params: (&run.params).into(),
        concordance: ConcordanceInfo {
            unsorted_sectors: prepared.concordance.concordance.unsorted().iter().cloned().collect(),
            entries_not_in_table: prepared.concordance.skipped.clone(),
        },
        categories: category_info(&run.demand),
        extensions: run.reports.iter().map(ExtensionSummary::from).collect(),
        warnings: ingested.warnings.clone(),
        provenance,
    };
    write_summary(&dir.join("summary.toml"), &summary)?;
    Ok(dir)
}

/// Runs each scenario and writes `<out>/<scenario>/footprint.csv` and `summary.toml`.
pub fn cmd_footprint(cfg: &RunConfig) -> Result<Vec<ScenarioRun>> {
    if cfg.scenarios.is_empty() {
        return Err(CliError::Config("no scenario given".into()));
    }
    let prepared = prepare(cfg)?;
    let mut runs = Vec::new();
    let mut names = BTreeSet::new();
    for arg in &cfg.scenarios {
        let scenario = resolve_scenario(arg, &prepared)?;
        if !names.insert(scenario.spec.name.clone()) {
            return Err(CliError::Config(format!(
                "scenario `{}` given twice",
                scenario.spec.name
            )));
        }
        let run = run_scenario(cfg, &prepared, scenario)?;
        write_run(&prepared, &run, &cfg.out)?;
        runs.push(run);
    }
    Ok(runs)
}

pub struct Comparison {
    pub runs: Vec<ScenarioRun>,
    pub plots: Vec<PlotSeries>,
}

/// Runs every scenario, then writes `comparison.csv` and `plots.json` in `out`.
/// The first scenario is the reference for deltas.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Comparison> {
    let runs = cmd_footprint(cfg)?;
    let reports: Vec<FootprintReport> = runs.iter().flat_map(|r| r.reports.clone()).collect();
    write_comparison_csv(&cfg.out.join("comparison.csv"), &reports)?;
    let plots = plot_series(&reports);
    write_plots(&cfg.out.join("plots.json"), &plots)?;
    Ok(Comparison { runs, plots })
}

pub const FIXTURE_HOME_REGION: &str = "R1";

/// Writes a complete, ingestible dataset for `fixture(n_regions, n_sectors, seed)`
/// with params, concordances and two scenarios. Returns the layout path.
pub fn cmd_fixture(n_regions: usize, n_sectors: usize, seed: u64, out: &Path) -> Result<PathBuf> {
    if n_regions == 0 || n_sectors == 0 {
        return Err(CliError::Config(
            "fixture needs at least one region and one sector".into(),
        ));
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let account = fixture(n_regions, n_sectors, seed);
    let index = account.index();

    let concordance = fixture_concordance(index)?;
    write_records(
        &out.join("concordance.csv"),
        b',',
        &["sector", "category"],
        concordance
            .mapping()
            .iter()
            .map(|(s, c)| vec![s.clone(), c.key().to_string()]),
    )?;
    let groups = fixture_sector_groups(index)?;
    write_records(
        &out.join("sector_groups.csv"),
        b',',
        &["sector", "group"],
        index.sectors().iter().map(|s| {
            vec![
                s.clone(),
                groups
                    .group_of(s)
                    .expect("every fixture sector has a group")
                    .to_string(),
            ]
        }),
    )?;

    let params = ParamsFile {
        weeks_worked_per_year: mrio_core::indicators::DEFAULT_WEEKS_WORKED,
        working_life_share: mrio_core::indicators::DEFAULT_WORKING_LIFE_SHARE,
        calendar_weeks: mrio_core::scenario::DEFAULT_CALENDAR_WEEKS,
        regions: index
            .regions()
            .iter()
            .enumerate()
            .map(|(r, name)| {
                let total = 100.0 * (r + 1) as f64;
                (
                    name.clone(),
                    Population {
                        working_age_population: 0.65 * total,
                        total_population: total,
                    },
                )
            })
            .collect(),
    };
    write_toml(&out.join("params.toml"), &params)?;

    let scenarios = out.join("scenarios");
    std::fs::create_dir_all(&scenarios).map_err(|e| CliError::io(&scenarios, e))?;
    let mut baseline = scenario_file_from_totals("baseline", &Default::default());
    baseline.kind = ScenarioKind::Baseline;
    baseline.targets.clear();
    write_toml(&scenarios.join("baseline.toml"), &baseline)?;

    let selected = select_demand(&account, &DemandSelection::consumption_and_gfcf(FIXTURE_HOME_REGION))?;
    let base = apply_scenario(
        &selected.consumption,
        selected.gfcf.as_ref().expect("GFCF kept apart"),
        &concordance,
        index,
        &ScenarioSpec::baseline("baseline"),
    )?;
    let mut halved = base.baseline;
    halved[SpendingCategory::Groceries] *= 0.5;
    let mut file = scenario_file_from_totals("halved-groceries", &halved);
    file.description = Some("Baseline spending with groceries halved".into());
    write_toml(&scenarios.join("halved-groceries.toml"), &file)?;

    let written = write_account(
        &account,
        out,
        &format!("fixture-{n_regions}x{n_sectors}-seed{seed}"),
        LayoutExtras {
            balance_tolerance: Some(1e-9),
            home_region: Some(FIXTURE_HOME_REGION.into()),
            params: Some("params.toml".into()),
            scenario_dir: Some("scenarios".into()),
            concordances: ConcordancePaths {
                categories: Some("concordance.csv".into()),
                sector_groups: Some("sector_groups.csv".into()),
            },
        },
    )?;
    Ok(written.layout)
}
