//! Reading an MRIO dataset described by a layout into an [`MrioAccount`],
//! and writing an account back out in the same layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mrio_core::indicators::{MaterialFlags, MaterialUse};
use mrio_core::matrix::DenseMatrix;
use mrio_core::model::{DemandColumn, ExtensionAccount, ExtensionKind, MrioAccount, RegionSectorIndex};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::layout::{write_toml, ConcordancePaths, ExtensionLayout, Layout, LoadedLayout, TablePaths};
use crate::tables::{delimiter_byte, format_number, read_grid, read_records, write_grid, write_records, Grid};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IngestWarning {
    pub region: String,
    pub sector: String,
    pub message: String,
}

/// Where an input came from and a digest of its bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileProvenance {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub account: MrioAccount,
    pub warnings: Vec<IngestWarning>,
    pub provenance: Vec<FileProvenance>,
    pub layout: LoadedLayout,
}

pub fn digest_file(role: &str, shown: &Path, path: &Path) -> Result<FileProvenance> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    Ok(FileProvenance {
        role: role.into(),
        path: shown.display().to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

pub fn load_account(layout_path: &Path) -> Result<Ingested> {
    let layout = LoadedLayout::load(layout_path)?;
    let l = &layout.layout;
    let delimiter = delimiter_byte(&l.delimiter)?;
    let mut provenance = Vec::new();
    let mut track = |role: &str, rel: &Path| -> Result<PathBuf> {
        let full = layout.resolve(rel);
        provenance.push(digest_file(role, rel, &full)?);
        Ok(full)
    };

    let z_path = track("z", &l.tables.z)?;
    let z = read_grid(&z_path, delimiter, 2, 2)?;
    let index = index_from_rows(&z_path, &z.row_labels)?;
    check_columns(&z_path, &z.column_labels, &index)?;

    let y_path = track("y", &l.tables.y)?;
    let y = read_grid(&y_path, delimiter, 2, 2)?;
    check_rows(&y_path, &y.row_labels, &index)?;
    let demand_columns: Vec<DemandColumn> = (0..y.values.cols())
        .map(|c| DemandColumn::new(y.column_labels[0][c].clone(), y.column_labels[1][c].clone()))
        .collect();

    let x_path = track("x", &l.tables.x)?;
    let output = read_output(&x_path, delimiter, &index)?;

    let mut extensions = Vec::new();
    for ext in &l.extensions {
        let path = track(&format!("extension:{}", ext.name), &ext.path)?;
        let direct = match &ext.direct {
            Some(rel) => Some(track(&format!("direct:{}", ext.name), rel)?),
            None => None,
        };
        extensions.push(read_extension(ext, &path, direct.as_deref(), delimiter, &index)?);
    }

    let mut warnings = Vec::new();
    for q in &l.quirks {
        index
            .flat(&q.region, &q.sector)
            .map_err(|e| CliError::data(&layout.path, e))?;
        warnings.push(IngestWarning {
            region: q.region.clone(),
            sector: q.sector.clone(),
            message: q.message.clone(),
        });
    }
    warnings.sort();

    let account = MrioAccount::new(
        index,
        z.values,
        y.values,
        demand_columns,
        output,
        extensions,
        l.year,
        l.monetary_unit.clone(),
    )
    .map_err(|e| CliError::data(&layout.path, e))?;
    Ok(Ingested {
        account,
        warnings,
        provenance,
        layout,
    })
}

/// Regions in order of first appearance; every region must list the same sectors in the same order.
fn index_from_rows(path: &Path, rows: &[Vec<String>]) -> Result<RegionSectorIndex> {
    let mut regions: Vec<String> = Vec::new();
    for r in rows {
        if regions.last() != Some(&r[0]) {
            if regions.contains(&r[0]) {
                return Err(CliError::parse(
                    path,
                    format!("rows of region `{}` are not contiguous", r[0]),
                ));
            }
            regions.push(r[0].clone());
        }
    }
    let sectors: Vec<String> = rows
        .iter()
        .take_while(|r| Some(&r[0]) == regions.first())
        .map(|r| r[1].clone())
        .collect();
    let index = RegionSectorIndex::new(regions, sectors).map_err(|e| CliError::data(path, e))?;
    check_rows(path, rows, &index)?;
    Ok(index)
}

fn check_rows(path: &Path, rows: &[Vec<String>], index: &RegionSectorIndex) -> Result<()> {
    if rows.len() != index.dim() {
        return Err(CliError::parse(
            path,
            format!("expected {} region-sector rows, found {}", index.dim(), rows.len()),
        ));
    }
    for (i, r) in rows.iter().enumerate() {
        let (region, sector) = index.labels(i);
        if r[0] != region || r[1] != sector {
            return Err(CliError::parse(
                path,
                format!("row {} is ({}, {}), expected ({region}, {sector})", i + 1, r[0], r[1]),
            ));
        }
    }
    Ok(())
}

fn check_columns(path: &Path, labels: &[Vec<String>], index: &RegionSectorIndex) -> Result<()> {
    if labels[0].len() != index.dim() {
        return Err(CliError::parse(
            path,
            format!(
                "expected {} region-sector columns, found {}",
                index.dim(),
                labels[0].len()
            ),
        ));
    }
    for (i, (r, s)) in labels[0].iter().zip(&labels[1]).enumerate() {
        let (region, sector) = index.labels(i);
        if r != region || s != sector {
            return Err(CliError::parse(
                path,
                format!("column {} is ({}, {}), expected ({region}, {sector})", i + 1, r, s),
            ));
        }
    }
    Ok(())
}

fn read_output(path: &Path, delimiter: u8, index: &RegionSectorIndex) -> Result<Vec<f64>> {
    let mut output = vec![None; index.dim()];
    for row in read_records(path, delimiter, 3)? {
        let i = index.flat(&row[0], &row[1]).map_err(|e| CliError::data(path, e))?;
        let v = crate::tables::parse_number(&row[2])
            .ok_or_else(|| CliError::parse(path, format!("not a number: `{}`", row[2])))?;
        if output[i].replace(v).is_some() {
            return Err(CliError::parse(path, format!("duplicate row ({}, {})", row[0], row[1])));
        }
    }
    output
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                let (r, s) = index.labels(i);
                CliError::parse(path, format!("missing output for ({r}, {s})"))
            })
        })
        .collect()
}

fn read_extension(
    ext: &ExtensionLayout,
    path: &Path,
    direct_path: Option<&Path>,
    delimiter: u8,
    index: &RegionSectorIndex,
) -> Result<ExtensionAccount> {
    let kind: ExtensionKind = ext.kind.parse().map_err(|e| CliError::data(path, e))?;
    let factor = ext.factor()?;
    let grid = read_grid(path, delimiter, 1, 2)?;
    check_columns(path, &grid.column_labels, index)?;
    let labels: Vec<String> = grid.row_labels.iter().map(|r| r[0].clone()).collect();
    let selected: Vec<String> = ext.stressors.clone().unwrap_or_else(|| labels.clone());
    let positions = selected
        .iter()
        .map(|s| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| CliError::parse(path, format!("no stressor row `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = DenseMatrix::zeros(selected.len(), index.dim());
    for (k, &p) in positions.iter().enumerate() {
        for (dst, src) in rows.row_mut(k).iter_mut().zip(grid.values.row(p)) {
            *dst = src * factor;
        }
    }

    let direct = match direct_path {
        Some(dp) => Some(read_direct(dp, delimiter, &selected, factor, index)?),
        None => None,
    };
    let material_flags = match &ext.material_flags {
        Some(map) => Some(
            map.iter()
                .map(|(label, flag)| {
                    let f: MaterialUse = flag.parse().map_err(|e| CliError::data(path, e))?;
                    Ok((label.clone(), f))
                })
                .collect::<Result<MaterialFlags>>()?,
        ),
        None => None,
    };
    Ok(ExtensionAccount {
        name: ext.name.clone(),
        unit: ext.unit.clone(),
        kind,
        stressors: selected,
        rows,
        direct,
        material_flags,
    })
}

/// Direct use per stressor, summed over every demand column of each region.
fn read_direct(
    path: &Path,
    delimiter: u8,
    stressors: &[String],
    factor: f64,
    index: &RegionSectorIndex,
) -> Result<DenseMatrix> {
    let grid = read_grid(path, delimiter, 1, 2)?;
    let region_of_column = grid.column_labels[0]
        .iter()
        .map(|r| index.region_position(r).map_err(|e| CliError::data(path, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut direct = DenseMatrix::zeros(stressors.len(), index.regions().len());
    for (k, s) in stressors.iter().enumerate() {
        let Some(p) = grid.row_labels.iter().position(|r| &r[0] == s) else {
            return Err(CliError::parse(path, format!("no direct-use row `{s}`")));
        };
        for (c, v) in grid.values.row(p).iter().enumerate() {
            direct[(k, region_of_column[c])] += v * factor;
        }
    }
    Ok(direct)
}

/// File names used by [`write_account`].
pub struct WrittenFiles {
    pub layout: PathBuf,
    pub layout_value: Layout,
}

/// Writes an account as comma-separated tables plus a layout descriptor in `dir`.
/// Extra layout sections (concordances, params, scenarios) are taken from `extras`.
pub fn write_account(account: &MrioAccount, dir: &Path, name: &str, extras: LayoutExtras) -> Result<WrittenFiles> {
    let tables = dir.join("tables");
    std::fs::create_dir_all(&tables).map_err(|e| CliError::io(&tables, e))?;
    let index = account.index();
    let pairs: Vec<Vec<String>> = (0..index.dim())
        .map(|i| {
            let (r, s) = index.labels(i);
            vec![r.to_string(), s.to_string()]
        })
        .collect();
    let regions_row: Vec<String> = pairs.iter().map(|p| p[0].clone()).collect();
    let sectors_row: Vec<String> = pairs.iter().map(|p| p[1].clone()).collect();

    write_grid(
        &tables.join("Z.csv"),
        b',',
        &["region", "sector"],
        &Grid {
            column_labels: vec![regions_row.clone(), sectors_row.clone()],
            row_labels: pairs.clone(),
            values: account.transactions().clone(),
        },
    )?;
    let columns = account.demand_columns();
    write_grid(
        &tables.join("Y.csv"),
        b',',
        &["region", "category"],
        &Grid {
            column_labels: vec![
                columns.iter().map(|c| c.region.clone()).collect(),
                columns.iter().map(|c| c.label.clone()).collect(),
            ],
            row_labels: pairs.clone(),
            values: account.final_demand().clone(),
        },
    )?;
    write_records(
        &tables.join("x.csv"),
        b',',
        &["region", "sector", "indout"],
        pairs
            .iter()
            .zip(account.output())
            .map(|(p, v)| vec![p[0].clone(), p[1].clone(), format_number(*v)]),
    )?;

    let mut extensions = Vec::new();
    for ext in account.extensions() {
        let file = PathBuf::from("tables").join(format!("{}.csv", ext.name));
        write_grid(
            &dir.join(&file),
            b',',
            &["region", "sector"],
            &Grid {
                column_labels: vec![regions_row.clone(), sectors_row.clone()],
                row_labels: ext.stressors.iter().map(|s| vec![s.clone()]).collect(),
                values: ext.rows.clone(),
            },
        )?;
        let direct = match &ext.direct {
            Some(d) => {
                let file = PathBuf::from("tables").join(format!("{}_direct.csv", ext.name));
                write_grid(
                    &dir.join(&file),
                    b',',
                    &["region", "category"],
                    &Grid {
                        column_labels: vec![
                            index.regions().to_vec(),
                            vec!["households".to_string(); index.regions().len()],
                        ],
                        row_labels: ext.stressors.iter().map(|s| vec![s.clone()]).collect(),
                        values: d.clone(),
                    },
                )?;
                Some(file)
            }
            None => None,
        };
        extensions.push(ExtensionLayout {
            name: ext.name.clone(),
            kind: ext.kind.label().into(),
            path: file,
            unit: ext.unit.clone(),
            stressors: None,
            scale: None,
            persons_to_hours: false,
            hours_per_worker_year: None,
            direct,
            material_flags: ext.material_flags.as_ref().map(|f| {
                f.iter()
                    .map(|(l, u)| (l.to_string(), u.label().to_string()))
                    .collect::<BTreeMap<_, _>>()
            }),
        });
    }

    let layout = Layout {
        name: name.into(),
        year: account.year(),
        monetary_unit: account.monetary_unit().into(),
        delimiter: "comma".into(),
        balance_tolerance: extras.balance_tolerance,
        home_region: extras.home_region,
        params: extras.params,
        scenario_dir: extras.scenario_dir,
        tables: TablePaths {
            z: "tables/Z.csv".into(),
            y: "tables/Y.csv".into(),
            x: "tables/x.csv".into(),
        },
        concordances: extras.concordances,
        extensions,
        quirks: Vec::new(),
    };
    let path = dir.join("layout.toml");
    write_toml(&path, &layout)?;
    Ok(WrittenFiles {
        layout: path,
        layout_value: layout,
    })
}

#[derive(Debug, Clone, Default)]
pub struct LayoutExtras {
    pub balance_tolerance: Option<f64>,
    pub home_region: Option<String>,
    pub params: Option<PathBuf>,
    pub scenario_dir: Option<PathBuf>,
    pub concordances: ConcordancePaths,
}
