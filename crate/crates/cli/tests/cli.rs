use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use mrio_core::algebra::{footprint_total, intensity, IntensityVector, LeontiefOperator, DEFAULT_OUTPUT_EPSILON};
use mrio_core::fixture::fixture;
use mrio_core::model::{select_demand, DemandSelection};
use mrio_footprint::commands::{cmd_compare, cmd_fixture, cmd_footprint, cmd_validate, RunConfig};
use mrio_footprint::ingest::load_account;
use mrio_footprint::CliError;

fn mrio() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrio"))
}

fn make_fixture(dir: &Path, regions: usize, sectors: usize, seed: u64) -> PathBuf {
    cmd_fixture(regions, sectors, seed, &dir.join("data")).unwrap()
}

fn run_cfg(layout: &Path, out: &Path, scenarios: &[&str]) -> RunConfig {
    RunConfig {
        layout: layout.to_path_buf(),
        scenarios: scenarios.iter().map(|s| s.to_string()).collect(),
        out: out.to_path_buf(),
        ..Default::default()
    }
}

/// (extension, dimension, label) → value, read from a footprint CSV.
fn read_cells(path: &Path) -> BTreeMap<(String, String, String), f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (
                (rec[1].to_string(), rec[2].to_string(), rec[3].to_string()),
                rec[4].parse().unwrap(),
            )
        })
        .collect()
}

fn all_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn fixture_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 2, 3, 42);
    let ingested = load_account(&layout).unwrap();
    assert_eq!(ingested.account, fixture(2, 3, 42));
    assert!(cmd_validate(&layout, None).unwrap().is_clean());
}

#[test]
fn fixture_files_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    make_fixture(a.path(), 2, 3, 42);
    make_fixture(b.path(), 2, 3, 42);
    assert_eq!(all_files(a.path()), all_files(b.path()));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 2, 3, 42);
    let status = mrio().args(["validate", "--layout"]).arg(&layout).status().unwrap();
    assert_eq!(status.code(), Some(0));

    // Raise one Z entry by 10% of that row's output; only that row unbalances.
    let z_path = dir.path().join("data/tables/Z.csv");
    let x_path = dir.path().join("data/tables/x.csv");
    let x: f64 = std::fs::read_to_string(&x_path)
        .unwrap()
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    let text = std::fs::read_to_string(&z_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
    let v: f64 = cells[3].parse().unwrap();
    cells[3] = format!("{:.16e}", v + 0.1 * x);
    lines[3] = cells.join(",");
    std::fs::write(&z_path, lines.join("\n") + "\n").unwrap();

    let out = mrio().args(["validate", "--layout"]).arg(&layout).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("1 row(s) flagged"), "{stdout}");
    assert!(stdout.contains("R1 / S02"), "{stdout}");

    let missing = dir.path().join("nowhere/layout.toml");
    let out = mrio().args(["validate", "--layout"]).arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("nowhere/layout.toml"), "{stderr}");
}

#[test]
fn footprint_totals_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 3, 5, 7);
    let out = dir.path().join("out");
    cmd_footprint(&run_cfg(&layout, &out, &["baseline"])).unwrap();
    let cells = read_cells(&out.join("baseline/footprint.csv"));

    let account = fixture(3, 5, 7);
    let op = LeontiefOperator::factorize(account.technical_coefficients(DEFAULT_OUTPUT_EPSILON).unwrap()).unwrap();
    let demand = select_demand(&account, &DemandSelection::consumption_and_gfcf("R1"))
        .unwrap()
        .combined();
    let q = op.solve(demand.as_slice()).unwrap();
    for ext in account.extensions() {
        let rows: Vec<IntensityVector> = (0..ext.stressors.len())
            .map(|r| {
                intensity(
                    "r",
                    &ext.unit,
                    ext.rows.row(r),
                    account.output(),
                    DEFAULT_OUTPUT_EPSILON,
                )
                .unwrap()
            })
            .collect();
        let s = IntensityVector::sum(&ext.name, &ext.unit, q.len(), rows.iter().map(|v| v.values.as_slice())).unwrap();
        let expected = footprint_total(&s, &q).unwrap();
        let got = cells[&(ext.name.clone(), "total".into(), "embedded".into())];
        assert_eq!(got, expected, "{}", ext.name);
    }
}

#[test]
fn halving_a_category_halves_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 3, 5, 7);
    let out = dir.path().join("out");
    cmd_footprint(&run_cfg(&layout, &out, &["baseline", "halved-groceries"])).unwrap();
    let base = read_cells(&out.join("baseline/footprint.csv"));
    let half = read_cells(&out.join("halved-groceries/footprint.csv"));
    for ((ext, dim, label), v) in &base {
        if dim != "category" {
            continue;
        }
        let h = half[&(ext.clone(), dim.clone(), label.clone())];
        let expected = if label.starts_with("Groceries") { 0.5 * v } else { *v };
        assert!(
            (h - expected).abs() <= 1e-12 * v.abs().max(1.0),
            "{ext} {label}: {h} vs {expected}"
        );
    }
}

#[test]
fn compare_deltas_and_plot_totals() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 3, 5, 7);
    let out = dir.path().join("out");
    let cmp = cmd_compare(&run_cfg(&layout, &out, &["baseline", "halved-groceries"])).unwrap();

    let base = read_cells(&out.join("baseline/footprint.csv"));
    let mut r = csv::Reader::from_path(out.join("comparison.csv")).unwrap();
    let mut checked = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let delta: f64 = rec[6].parse().unwrap();
        if &rec[0] == "baseline" {
            assert_eq!(delta, 0.0);
        } else if &rec[2] == "category" && rec[3].starts_with("Groceries") {
            let v = base[&(rec[1].to_string(), "category".into(), rec[3].to_string())];
            assert!((delta + 0.5 * v).abs() <= 1e-12 * v.max(1.0));
            checked += 1;
        }
    }
    assert!(checked >= 4);

    assert!(cmp.plots.iter().any(|p| p.figure == "fig4"));
    for series in &cmp.plots {
        for bar in &series.bars {
            let sum: f64 = bar.segments.iter().map(|s| s.value).sum();
            assert!(
                (sum - bar.total).abs() <= 1e-9 * bar.total.abs().max(1e-300),
                "{}",
                series.figure
            );
            assert!(bar.segments.iter().all(|s| s.value >= 0.0));
        }
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("plots.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), cmp.plots.len());
}

#[test]
fn compare_with_itself_has_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 2, 4, 3);
    let out = dir.path().join("out");
    let same = dir.path().join("data/scenarios/baseline.toml");
    let copy = dir.path().join("again.toml");
    std::fs::write(
        &copy,
        std::fs::read_to_string(&same)
            .unwrap()
            .replacen("name = \"baseline\"", "name = \"again\"", 1),
    )
    .unwrap();
    cmd_compare(&run_cfg(&layout, &out, &["baseline", copy.to_str().unwrap()])).unwrap();
    let mut r = csv::Reader::from_path(out.join("comparison.csv")).unwrap();
    for rec in r.records() {
        assert_eq!(rec.unwrap()[6].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn unknown_scenario_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 1, 2, 0);
    let err = cmd_footprint(&run_cfg(&layout, &dir.path().join("out"), &["no-such"]))
        .err()
        .unwrap();
    assert!(matches!(err, CliError::UnknownScenario(ref s) if s == "no-such"));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn minimal_economy_runs_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    let status = mrio()
        .args(["fixture", "--regions", "1", "--sectors", "1", "--seed", "0", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let layout = data.join("layout.toml");
    assert!(mrio()
        .args(["validate", "--layout"])
        .arg(&layout)
        .status()
        .unwrap()
        .success());
    for verb in ["footprint", "compare"] {
        let status = mrio()
            .args([verb, "--layout"])
            .arg(&layout)
            .args(["--scenario", "baseline", "--scenario", "halved-groceries", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{verb}");
    }
    let summary = std::fs::read_to_string(out.join("baseline/summary.toml")).unwrap();
    assert!(summary.contains("sha256"));
}

#[test]
fn extension_selection_and_home_region_flags() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 2, 3, 5);
    let out = dir.path().join("out");
    let status = mrio()
        .args(["footprint", "--layout"])
        .arg(&layout)
        .args([
            "--scenario",
            "baseline",
            "--extensions",
            "energy,material",
            "--home-region",
            "R2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let cells = read_cells(&out.join("baseline/footprint.csv"));
    let names: std::collections::BTreeSet<&str> = cells.keys().map(|k| k.0.as_str()).collect();
    assert_eq!(
        names.into_iter().collect::<Vec<_>>(),
        ["energy", "material", "material-mf"]
    );
    let summary = std::fs::read_to_string(out.join("baseline/summary.toml")).unwrap();
    assert!(summary.contains("home_region = \"R2\""));

    let bad = mrio()
        .args(["footprint", "--layout"])
        .arg(&layout)
        .args(["--scenario", "baseline", "--extensions", "water", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("water"));
}

#[test]
fn labour_in_persons_converts_to_hours_and_quirks_warn() {
    let dir = tempfile::tempdir().unwrap();
    let layout = make_fixture(dir.path(), 2, 3, 9);
    let plain = load_account(&layout).unwrap();
    let text = std::fs::read_to_string(&layout).unwrap().replacen(
        "unit = \"hours\"",
        "unit = \"hours\"\npersons_to_hours = true\nhours_per_worker_year = 1500.0",
        1,
    ) + "\n[[quirks]]\nregion = \"R2\"\nsector = \"S01\"\nmessage = \"known gap\"\n";
    std::fs::write(&layout, text).unwrap();
    let converted = load_account(&layout).unwrap();
    let a = &plain.account.extension("labour").unwrap().rows;
    let b = &converted.account.extension("labour").unwrap().rows;
    for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
        assert_eq!(*v, u * 1_500_000.0);
    }
    assert_eq!(converted.warnings.len(), 1);
    let report = cmd_validate(&layout, Some(&dir.path().join("v"))).unwrap();
    assert!(report.render().contains("warning: R2 / S01: known gap"));
    assert!(dir.path().join("v/validation.toml").is_file());
}

#[test]
fn shipped_scenarios_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios");
    for name in ["baseline-2012", "decent-living", "good-life"] {
        let s = mrio_footprint::config::load_scenario(&root.join(format!("{name}.toml"))).unwrap();
        assert_eq!(s.spec.name, name);
        assert_eq!(s.spec.home_region.as_deref(), Some("GB"));
    }
}
