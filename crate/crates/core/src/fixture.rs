//! Seeded synthetic economies for tests and desk-scale runs.
//!
//! Accounts are balanced by construction (output equals row sums of the
//! transaction and final-demand blocks) and productive (every coefficient
//! column sums to at most 0.7).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{LeontiefOperator, TechnicalCoefficients};
use crate::error::Result;
use crate::indicators::{MaterialFlags, MaterialUse, SectorGroupConcordance, DEFAULT_SECTOR_GROUPS};
use crate::matrix::DenseMatrix;
use crate::model::{DemandCategory, DemandColumn, ExtensionAccount, ExtensionKind, MrioAccount, RegionSectorIndex};
use crate::scenario::{CategoryConcordance, SpendingCategory};

pub const FIXTURE_YEAR: i32 = 2012;
pub const FIXTURE_MONETARY_UNIT: &str = "M.EUR";
const MAX_COLUMN_SUM: f64 = 0.7;

pub const LABOUR_STRESSORS: [&str; 6] = [
    "Employment hours: Low-skilled female",
    "Employment hours: Low-skilled male",
    "Employment hours: Medium-skilled female",
    "Employment hours: Medium-skilled male",
    "Employment hours: High-skilled female",
    "Employment hours: High-skilled male",
];

pub const MATERIAL_STRESSORS: [(&str, MaterialUse); 4] = [
    ("Domestic extraction used: biomass", MaterialUse::Used),
    ("Domestic extraction used: minerals", MaterialUse::Used),
    ("Unused domestic extraction: biomass", MaterialUse::Unused),
    ("Unused domestic extraction: minerals", MaterialUse::Unused),
];

pub fn region_names(n_regions: usize) -> Vec<String> {
    (1..=n_regions).map(|r| format!("R{r}")).collect()
}

pub fn sector_names(n_sectors: usize) -> Vec<String> {
    (1..=n_sectors).map(|s| format!("S{s:02}")).collect()
}

/// A balanced, productive economy with labour, energy, emissions and material accounts.
///
/// Panics if either size is zero.
pub fn fixture(n_regions: usize, n_sectors: usize, seed: u64) -> MrioAccount {
    assert!(
        n_regions >= 1 && n_sectors >= 1,
        "fixture needs at least one region and sector"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index =
        RegionSectorIndex::new(region_names(n_regions), sector_names(n_sectors)).expect("generated labels are unique");
    let n = index.dim();

    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let column: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        let sum: f64 = column.iter().sum();
        if sum > 0.0 {
            let target = rng.gen_range(0.1..MAX_COLUMN_SUM);
            for (i, v) in column.into_iter().enumerate() {
                a[(i, j)] = v * target / sum;
            }
        }
    }

    let mut demand_columns = Vec::new();
    for region in index.regions() {
        for category in DemandCategory::ALL {
            demand_columns.push(DemandColumn::new(region.clone(), category.label()));
        }
    }
    let mut y = DenseMatrix::zeros(n, demand_columns.len());
    for i in 0..n {
        let producer = index.region_of(i);
        for paying in 0..n_regions {
            let base = 5 * paying;
            let home_bias = if producer == paying { 4.0 } else { 1.0 };
            y[(i, base)] = home_bias * rng.gen_range(1.0..50.0);
            y[(i, base + 1)] = if rng.gen_bool(0.3) {
                rng.gen_range(0.0..2.0)
            } else {
                0.0
            };
            y[(i, base + 2)] = if rng.gen_bool(0.4) {
                home_bias * rng.gen_range(0.0..10.0)
            } else {
                0.0
            };
            y[(i, base + 3)] = if rng.gen_bool(0.5) {
                home_bias * rng.gen_range(0.0..20.0)
            } else {
                0.0
            };
            // Inventory changes may be negative but never outweigh household demand.
            y[(i, base + 4)] = rng.gen_range(-1.0..1.0);
        }
    }

    let final_totals = y.row_sums();
    let coefficients = TechnicalCoefficients::from_matrix(a).expect("nonnegative by construction");
    let operator = LeontiefOperator::factorize(coefficients).expect("column sums below one");
    let gross = operator.solve(&final_totals).expect("well-conditioned fixture system");
    let a = operator.coefficients().matrix();
    let mut z = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = a[(i, j)] * gross[j];
        }
    }
    let output: Vec<f64> = z.row_sums().iter().zip(&final_totals).map(|(zs, ys)| zs + ys).collect();

    let extensions = vec![
        labour_account(&mut rng, &index, &output),
        energy_account(&mut rng, &index, &output),
        emissions_account(&mut rng, &index, &output),
        material_account(&mut rng, &index, &output),
    ];

    MrioAccount::new(
        index,
        z,
        y,
        demand_columns,
        output,
        extensions,
        FIXTURE_YEAR,
        FIXTURE_MONETARY_UNIT,
    )
    .expect("fixture satisfies account invariants")
}

fn labour_account(rng: &mut ChaCha8Rng, index: &RegionSectorIndex, output: &[f64]) -> ExtensionAccount {
    let n = index.dim();
    let mut rows = DenseMatrix::zeros(LABOUR_STRESSORS.len(), n);
    for j in 0..n {
        // Poorer regions (higher index) are more labour-intensive.
        let regional = 1.0 + index.region_of(j) as f64;
        let intensity = regional * rng.gen_range(0.5..5.0);
        let shares: Vec<f64> = (0..LABOUR_STRESSORS.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = shares.iter().sum();
        for (r, share) in shares.iter().enumerate() {
            rows[(r, j)] = output[j] * intensity * share / total;
        }
    }
    ExtensionAccount {
        name: "labour".into(),
        unit: "hours".into(),
        kind: ExtensionKind::Labour,
        stressors: LABOUR_STRESSORS.iter().map(|s| (*s).into()).collect(),
        rows,
        direct: None,
        material_flags: None,
    }
}

fn energy_account(rng: &mut ChaCha8Rng, index: &RegionSectorIndex, output: &[f64]) -> ExtensionAccount {
    let n = index.dim();
    let mut rows = DenseMatrix::zeros(1, n);
    for j in 0..n {
        rows[(0, j)] = output[j] * rng.gen_range(0.01..0.5);
    }
    let mut direct = DenseMatrix::zeros(1, index.regions().len());
    for r in 0..index.regions().len() {
        direct[(0, r)] = rng.gen_range(10.0..100.0);
    }
    ExtensionAccount {
        name: "energy".into(),
        unit: "TJ".into(),
        kind: ExtensionKind::Energy,
        stressors: vec!["Energy carrier net use".into()],
        rows,
        direct: Some(direct),
        material_flags: None,
    }
}

fn emissions_account(rng: &mut ChaCha8Rng, index: &RegionSectorIndex, output: &[f64]) -> ExtensionAccount {
    let n = index.dim();
    let labels = ["CO2 (combustion)", "CH4 as CO2-eq"];
    let mut rows = DenseMatrix::zeros(labels.len(), n);
    for r in 0..labels.len() {
        for j in 0..n {
            rows[(r, j)] = output[j] * rng.gen_range(0.0..0.05);
        }
    }
    let mut direct = DenseMatrix::zeros(labels.len(), index.regions().len());
    for r in 0..labels.len() {
        for c in 0..index.regions().len() {
            direct[(r, c)] = rng.gen_range(1.0..10.0);
        }
    }
    ExtensionAccount {
        name: "emissions".into(),
        unit: "kt CO2-eq".into(),
        kind: ExtensionKind::Emissions,
        stressors: labels.iter().map(|s| (*s).into()).collect(),
        rows,
        direct: Some(direct),
        material_flags: None,
    }
}

fn material_account(rng: &mut ChaCha8Rng, index: &RegionSectorIndex, output: &[f64]) -> ExtensionAccount {
    let n = index.dim();
    let extracting = (index.sectors().len() / 3).max(1);
    let mut rows = DenseMatrix::zeros(MATERIAL_STRESSORS.len(), n);
    for j in 0..n {
        if index.sector_of(j) >= extracting {
            continue;
        }
        for r in 0..MATERIAL_STRESSORS.len() {
            rows[(r, j)] = output[j] * rng.gen_range(0.0..2.0);
        }
    }
    ExtensionAccount {
        name: "material".into(),
        unit: "kt".into(),
        kind: ExtensionKind::Material,
        stressors: MATERIAL_STRESSORS.iter().map(|(s, _)| (*s).into()).collect(),
        rows,
        direct: None,
        material_flags: Some(
            MATERIAL_STRESSORS
                .iter()
                .map(|(s, f)| (String::from(*s), *f))
                .collect::<MaterialFlags>(),
        ),
    }
}

/// Sector `k` maps to consumption category `k mod 12`.
pub fn fixture_concordance(index: &RegionSectorIndex) -> Result<CategoryConcordance> {
    CategoryConcordance::new(
        index.sectors(),
        index
            .sectors()
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), SpendingCategory::CONSUMPTION[k % 12])),
    )
}

/// Sector `k` maps to group `k mod 7` of the default groups.
pub fn fixture_sector_groups(index: &RegionSectorIndex) -> Result<SectorGroupConcordance> {
    SectorGroupConcordance::new(
        DEFAULT_SECTOR_GROUPS.iter().map(|g| (*g).into()).collect(),
        index
            .sectors()
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), DEFAULT_SECTOR_GROUPS[k % 7].into())),
    )
}
