//! The MRIO account: region-sector indexing, transaction and final-demand
//! blocks, satellite extensions, balance validation and demand selection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::algebra::{technical_coefficients, DemandVector, TechnicalCoefficients};
use crate::error::{Error, Result};
use crate::indicators::MaterialFlags;
use crate::matrix::DenseMatrix;

pub const DEFAULT_BALANCE_TOLERANCE: f64 = 1e-6;

/// Ordered regions and sectors; flat index `r·|sectors| + s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSectorIndex {
    regions: Vec<String>,
    sectors: Vec<String>,
    region_lookup: BTreeMap<String, usize>,
    sector_lookup: BTreeMap<String, usize>,
}

impl RegionSectorIndex {
    pub fn new(regions: Vec<String>, sectors: Vec<String>) -> Result<Self> {
        if regions.is_empty() || sectors.is_empty() {
            return Err(Error::InvalidParameter(
                "an index needs at least one region and one sector".into(),
            ));
        }
        let region_lookup = unique_lookup(&regions)?;
        let sector_lookup = unique_lookup(&sectors)?;
        Ok(RegionSectorIndex {
            regions,
            sectors,
            region_lookup,
            sector_lookup,
        })
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn dim(&self) -> usize {
        self.regions.len() * self.sectors.len()
    }

    pub fn region_position(&self, region: &str) -> Result<usize> {
        self.region_lookup
            .get(region)
            .copied()
            .ok_or_else(|| Error::UnknownRegion(region.into()))
    }

    pub fn sector_position(&self, sector: &str) -> Result<usize> {
        self.sector_lookup
            .get(sector)
            .copied()
            .ok_or_else(|| Error::UnknownSector(sector.into()))
    }

    pub fn flat(&self, region: &str, sector: &str) -> Result<usize> {
        Ok(self.region_position(region)? * self.sectors.len() + self.sector_position(sector)?)
    }

    /// `(region, sector)` labels of a flat position.
    pub fn labels(&self, flat: usize) -> (&str, &str) {
        let s = self.sectors.len();
        (&self.regions[flat / s], &self.sectors[flat % s])
    }

    pub fn region_of(&self, flat: usize) -> usize {
        flat / self.sectors.len()
    }

    pub fn sector_of(&self, flat: usize) -> usize {
        flat % self.sectors.len()
    }

    /// Flat positions belonging to one region.
    pub fn region_block(&self, region: usize) -> core::ops::Range<usize> {
        let s = self.sectors.len();
        region * s..(region + 1) * s
    }
}

fn unique_lookup(labels: &[String]) -> Result<BTreeMap<String, usize>> {
    let mut lookup = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        if lookup.insert(label.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(label.clone()));
        }
    }
    Ok(lookup)
}

/// The five final-demand classes carried per paying region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DemandCategory {
    Households,
    NonProfit,
    Government,
    Gfcf,
    InventoryChange,
}

impl DemandCategory {
    pub const ALL: [DemandCategory; 5] = [
        DemandCategory::Households,
        DemandCategory::NonProfit,
        DemandCategory::Government,
        DemandCategory::Gfcf,
        DemandCategory::InventoryChange,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DemandCategory::Households => "households",
            DemandCategory::NonProfit => "non-profit",
            DemandCategory::Government => "government",
            DemandCategory::Gfcf => "gfcf",
            DemandCategory::InventoryChange => "inventory-change",
        }
    }
}

impl fmt::Display for DemandCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DemandCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Ok(match key.as_str() {
            "households" | "household" | "finalconsumptionexpenditurebyhouseholds" => DemandCategory::Households,
            "nonprofit" | "npish" | "finalconsumptionexpenditurebynonprofitorganisationsservinghouseholdsnpish" => {
                DemandCategory::NonProfit
            }
            "government" | "finalconsumptionexpenditurebygovernment" => DemandCategory::Government,
            "gfcf" | "grossfixedcapitalformation" => DemandCategory::Gfcf,
            "inventorychange" | "inventories" | "changesininventories" => DemandCategory::InventoryChange,
            _ => return Err(Error::UnknownCategory(s.into())),
        })
    }
}

/// One final-demand column: paying region and demand class label.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandColumn {
    pub region: String,
    pub label: String,
    /// `None` for extra columns kept in storage but never selected.
    pub category: Option<DemandCategory>,
}

impl DemandColumn {
    pub fn new(region: impl Into<String>, label: impl Into<String>) -> Self {
        let label = label.into();
        let category = label.parse().ok();
        DemandColumn {
            region: region.into(),
            label,
            category,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionKind {
    Labour,
    Energy,
    Emissions,
    Material,
    Other,
}

impl ExtensionKind {
    pub fn label(self) -> &'static str {
        match self {
            ExtensionKind::Labour => "labour",
            ExtensionKind::Energy => "energy",
            ExtensionKind::Emissions => "emissions",
            ExtensionKind::Material => "material",
            ExtensionKind::Other => "other",
        }
    }

    /// Whether household direct use (fuel burning, residential energy) is tracked.
    pub fn has_direct_use(self) -> bool {
        matches!(self, ExtensionKind::Energy | ExtensionKind::Emissions)
    }
}

impl FromStr for ExtensionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "labour" | "labor" | "employment" => ExtensionKind::Labour,
            "energy" => ExtensionKind::Energy,
            "emissions" | "emission" => ExtensionKind::Emissions,
            "material" | "materials" => ExtensionKind::Material,
            "other" => ExtensionKind::Other,
            _ => return Err(Error::InvalidParameter(format!("unknown extension kind `{s}`"))),
        })
    }
}

/// A satellite account: stressor rows over region-sectors plus optional
/// direct use per (stressor, paying region).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionAccount {
    pub name: String,
    pub unit: String,
    pub kind: ExtensionKind,
    pub stressors: Vec<String>,
    /// `stressors.len() × n`.
    pub rows: DenseMatrix,
    /// `stressors.len() × |regions|`.
    pub direct: Option<DenseMatrix>,
    pub material_flags: Option<MaterialFlags>,
}

impl ExtensionAccount {
    pub fn stressor_position(&self, label: &str) -> Option<usize> {
        self.stressors.iter().position(|s| s == label)
    }

    fn validate(&self, index: &RegionSectorIndex) -> Result<()> {
        if self.unit.trim().is_empty() {
            return Err(Error::UnitMismatch {
                expected: format!("a unit label for extension `{}`", self.name),
                found: String::new(),
            });
        }
        unique_lookup(&self.stressors)?;
        if self.rows.rows() != self.stressors.len() {
            return Err(Error::DimensionMismatch {
                context: "extension stressor rows",
                expected: self.stressors.len(),
                found: self.rows.rows(),
            });
        }
        if self.rows.cols() != index.dim() {
            return Err(Error::DimensionMismatch {
                context: "extension columns",
                expected: index.dim(),
                found: self.rows.cols(),
            });
        }
        if let Some((i, value)) = self.rows.first_negative() {
            return Err(Error::NegativeEntry {
                context: "extension rows",
                index: i,
                value,
            });
        }
        if let Some(direct) = &self.direct {
            if direct.rows() != self.stressors.len() {
                return Err(Error::DimensionMismatch {
                    context: "direct-use stressor rows",
                    expected: self.stressors.len(),
                    found: direct.rows(),
                });
            }
            if direct.cols() != index.regions().len() {
                return Err(Error::DimensionMismatch {
                    context: "direct-use regions",
                    expected: index.regions().len(),
                    found: direct.cols(),
                });
            }
        }
        if let Some(flags) = &self.material_flags {
            for label in &self.stressors {
                flags.get(label)?;
            }
        }
        Ok(())
    }
}

/// One reference year of a multi-regional table with its extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MrioAccount {
    index: RegionSectorIndex,
    transactions: DenseMatrix,
    final_demand: DenseMatrix,
    demand_columns: Vec<DemandColumn>,
    output: Vec<f64>,
    extensions: Vec<ExtensionAccount>,
    year: i32,
    monetary_unit: String,
}

impl MrioAccount {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        index: RegionSectorIndex,
        transactions: DenseMatrix,
        final_demand: DenseMatrix,
        demand_columns: Vec<DemandColumn>,
        output: Vec<f64>,
        extensions: Vec<ExtensionAccount>,
        year: i32,
        monetary_unit: impl Into<String>,
    ) -> Result<Self> {
        let n = index.dim();
        let dims = [
            ("transaction rows", transactions.rows()),
            ("transaction columns", transactions.cols()),
            ("final-demand rows", final_demand.rows()),
            ("total output", output.len()),
        ];
        for (context, found) in dims {
            if found != n {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: n,
                    found,
                });
            }
        }
        if final_demand.cols() != demand_columns.len() {
            return Err(Error::DimensionMismatch {
                context: "final-demand columns",
                expected: demand_columns.len(),
                found: final_demand.cols(),
            });
        }
        for col in &demand_columns {
            index.region_position(&col.region)?;
        }
        if let Some((i, value)) = transactions.first_negative() {
            return Err(Error::NegativeEntry {
                context: "transaction matrix",
                index: i,
                value,
            });
        }
        if let Some((i, &value)) = output.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeEntry {
                context: "total output",
                index: i,
                value,
            });
        }
        let mut names = BTreeSet::new();
        for ext in &extensions {
            if !names.insert(ext.name.clone()) {
                return Err(Error::DuplicateLabel(ext.name.clone()));
            }
            ext.validate(&index)?;
        }
        Ok(MrioAccount {
            index,
            transactions,
            final_demand,
            demand_columns,
            output,
            extensions,
            year,
            monetary_unit: monetary_unit.into(),
        })
    }

    pub fn index(&self) -> &RegionSectorIndex {
        &self.index
    }

    pub fn transactions(&self) -> &DenseMatrix {
        &self.transactions
    }

    pub fn final_demand(&self) -> &DenseMatrix {
        &self.final_demand
    }

    pub fn demand_columns(&self) -> &[DemandColumn] {
        &self.demand_columns
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn extensions(&self) -> &[ExtensionAccount] {
        &self.extensions
    }

    pub fn extension(&self, name: &str) -> Result<&ExtensionAccount> {
        self.extensions
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownExtension(name.into()))
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn monetary_unit(&self) -> &str {
        &self.monetary_unit
    }

    pub fn technical_coefficients(&self, epsilon: f64) -> Result<TechnicalCoefficients> {
        technical_coefficients(&self.transactions, &self.output, epsilon)
    }

    /// Mutable access to a transaction entry; used to build perturbed test accounts.
    pub fn transactions_mut(&mut self) -> &mut DenseMatrix {
        &mut self.transactions
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceViolation {
    pub index: usize,
    pub region: String,
    pub sector: String,
    pub output: f64,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub tolerance: f64,
    pub max_relative: f64,
    pub violations: Vec<BalanceViolation>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Row residuals `|x − ΣZ − ΣY| / max(x, 1)` against a relative tolerance.
pub fn validate_balance(account: &MrioAccount, tolerance: f64) -> BalanceReport {
    let z_sums = account.transactions.row_sums();
    let y_sums = account.final_demand.row_sums();
    let mut max_relative: f64 = 0.0;
    let mut violations = Vec::new();
    for (i, ((&x, z), y)) in account.output.iter().zip(&z_sums).zip(&y_sums).enumerate() {
        let residual = x - z - y;
        let relative = residual.abs() / x.max(1.0);
        max_relative = max_relative.max(relative);
        if relative > tolerance {
            let (region, sector) = account.index.labels(i);
            violations.push(BalanceViolation {
                index: i,
                region: region.into(),
                sector: sector.into(),
                output: x,
                residual,
                relative,
            });
        }
    }
    BalanceReport {
        tolerance,
        max_relative,
        violations,
    }
}

/// Which final-demand columns form a spending vector. Inventory change can
/// never be selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandSelection {
    paying_regions: Vec<String>,
    categories: Vec<DemandCategory>,
    merge: bool,
}

impl DemandSelection {
    /// `merge = false` keeps GFCF in its own vector.
    pub fn new(paying_regions: Vec<String>, categories: Vec<DemandCategory>, merge: bool) -> Result<Self> {
        if categories.contains(&DemandCategory::InventoryChange) {
            return Err(Error::UnknownCategory(
                "inventory-change (excluded from scenario demand by policy)".into(),
            ));
        }
        let mut categories = categories;
        categories.sort();
        categories.dedup();
        Ok(DemandSelection {
            paying_regions,
            categories,
            merge,
        })
    }

    /// Households, non-profit and government consolidated, GFCF kept apart.
    pub fn consumption_and_gfcf(region: &str) -> Self {
        DemandSelection {
            paying_regions: vec![region.to_string()],
            categories: vec![
                DemandCategory::Households,
                DemandCategory::NonProfit,
                DemandCategory::Government,
                DemandCategory::Gfcf,
            ],
            merge: false,
        }
    }

    pub fn paying_regions(&self) -> &[String] {
        &self.paying_regions
    }

    pub fn categories(&self) -> &[DemandCategory] {
        &self.categories
    }

    pub fn merge(&self) -> bool {
        self.merge
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedDemand {
    pub consumption: DemandVector,
    /// Present when GFCF was selected without merging.
    pub gfcf: Option<DemandVector>,
}

impl SelectedDemand {
    /// Consumption plus GFCF, if GFCF was kept apart.
    pub fn combined(&self) -> DemandVector {
        match &self.gfcf {
            Some(g) => self
                .consumption
                .add(g)
                .expect("selected vectors share the account dimension"),
            None => self.consumption.clone(),
        }
    }
}

/// Sums the selected final-demand columns.
pub fn select_demand(account: &MrioAccount, selection: &DemandSelection) -> Result<SelectedDemand> {
    let regions: BTreeSet<&str> = selection
        .paying_regions
        .iter()
        .map(|r| account.index.region_position(r).map(|_| r.as_str()))
        .collect::<Result<_>>()?;
    for category in &selection.categories {
        let present = account.demand_columns.iter().any(|c| c.category == Some(*category));
        if !present {
            return Err(Error::UnknownCategory(category.label().into()));
        }
    }
    let split_gfcf = !selection.merge && selection.categories.contains(&DemandCategory::Gfcf);

    let n = account.index.dim();
    let mut consumption = vec![0.0; n];
    let mut gfcf = vec![0.0; n];
    for (c, column) in account.demand_columns.iter().enumerate() {
        let Some(category) = column.category else {
            continue;
        };
        if !regions.contains(column.region.as_str()) || !selection.categories.contains(&category) {
            continue;
        }
        let target = if split_gfcf && category == DemandCategory::Gfcf {
            &mut gfcf
        } else {
            &mut consumption
        };
        for (i, t) in target.iter_mut().enumerate() {
            *t += account.final_demand[(i, c)];
        }
    }
    Ok(SelectedDemand {
        consumption: DemandVector::new(consumption)?,
        gfcf: if split_gfcf {
            Some(DemandVector::new(gfcf)?)
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_account() -> MrioAccount {
        let index = RegionSectorIndex::new(vec!["A".into(), "B".into()], vec!["food".into(), "care".into()]).unwrap();
        let z = DenseMatrix::from_rows(&[
            [1.0, 2.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0],
            [2.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 2.0],
        ])
        .unwrap();
        let mut columns = Vec::new();
        for region in ["A", "B"] {
            for category in DemandCategory::ALL {
                columns.push(DemandColumn::new(region, category.label()));
            }
        }
        // Column order: A hh, npish, gov, gfcf, inv, B hh, npish, gov, gfcf, inv
        let y = DenseMatrix::from_rows(&[
            [10.0, 1.0, 2.0, 3.0, -0.5, 1.0, 0.0, 0.0, 0.0, 0.0],
            [5.0, 0.0, 4.0, 0.0, 0.5, 2.0, 0.0, 1.0, 0.0, 0.0],
            [3.0, 0.0, 0.0, 1.0, 0.0, 8.0, 2.0, 0.0, 4.0, 1.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 6.0, 0.0, 3.0, 2.0, 0.0],
        ])
        .unwrap();
        let x: Vec<f64> = z.row_sums().iter().zip(y.row_sums()).map(|(a, b)| a + b).collect();
        MrioAccount::new(index, z, y, columns, x, Vec::new(), 2012, "M.EUR").unwrap()
    }

    #[test]
    fn index_is_row_major_bijection() {
        let index =
            RegionSectorIndex::new(vec!["X".into(), "Y".into(), "Z".into()], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(index.dim(), 6);
        let mut seen = BTreeSet::new();
        for r in index.regions() {
            for s in index.sectors() {
                let flat = index.flat(r, s).unwrap();
                assert_eq!(index.labels(flat), (r.as_str(), s.as_str()));
                seen.insert(flat);
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), [0, 1, 2, 3, 4, 5]);
        assert_eq!(index.flat("Y", "a").unwrap(), 2);
        assert!(matches!(index.flat("Q", "a"), Err(Error::UnknownRegion(_))));
    }

    #[test]
    fn duplicate_codes_rejected() {
        assert!(matches!(
            RegionSectorIndex::new(vec!["A".into(), "A".into()], vec!["s".into()]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn balanced_account_has_no_violations() {
        let account = small_account();
        assert!(validate_balance(&account, 1e-9).is_balanced());
        assert!(validate_balance(&account, f64::INFINITY).is_balanced());
    }

    #[test]
    fn perturbed_row_is_flagged() {
        let mut account = small_account();
        let x2 = account.output()[2];
        account.transactions_mut()[(2, 1)] += 0.1 * x2;
        let report = validate_balance(&account, 1e-6);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, 2);
        assert_eq!(report.violations[0].region, "B");
        assert!(validate_balance(&account, f64::INFINITY).is_balanced());
    }

    #[test]
    fn households_only_selects_one_column() {
        let account = small_account();
        let sel = DemandSelection::new(vec!["A".into()], vec![DemandCategory::Households], true).unwrap();
        let demand = select_demand(&account, &sel).unwrap();
        assert_eq!(demand.consumption.as_slice(), &[10.0, 5.0, 3.0, 0.0]);
        assert!(demand.gfcf.is_none());
    }

    #[test]
    fn consolidated_vector_sums_three_columns() {
        let account = small_account();
        let sel = DemandSelection::new(
            vec!["A".into()],
            vec![
                DemandCategory::Households,
                DemandCategory::Government,
                DemandCategory::NonProfit,
            ],
            true,
        )
        .unwrap();
        let demand = select_demand(&account, &sel).unwrap();
        assert_eq!(demand.consumption.as_slice(), &[13.0, 9.0, 3.0, 1.0]);
    }

    #[test]
    fn gfcf_kept_apart_unless_merged() {
        let account = small_account();
        let sel = DemandSelection::consumption_and_gfcf("B");
        let demand = select_demand(&account, &sel).unwrap();
        assert_eq!(demand.consumption.as_slice(), &[1.0, 3.0, 10.0, 9.0]);
        assert_eq!(demand.gfcf.as_ref().unwrap().as_slice(), &[0.0, 0.0, 4.0, 2.0]);
        assert_eq!(demand.combined().as_slice(), &[1.0, 3.0, 14.0, 11.0]);

        let merged = DemandSelection::new(
            vec!["B".into()],
            vec![DemandCategory::Households, DemandCategory::Gfcf],
            true,
        )
        .unwrap();
        let demand = select_demand(&account, &merged).unwrap();
        assert_eq!(demand.consumption.as_slice(), &[1.0, 2.0, 12.0, 8.0]);
    }

    #[test]
    fn inventory_change_is_rejected() {
        let err = DemandSelection::new(
            vec!["A".into()],
            vec![DemandCategory::Households, DemandCategory::InventoryChange],
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownCategory(msg) if msg.contains("inventory")));
    }

    #[test]
    fn unknown_region_rejected() {
        let account = small_account();
        let sel = DemandSelection::new(vec!["GB".into()], vec![DemandCategory::Households], true).unwrap();
        assert!(matches!(
            select_demand(&account, &sel),
            Err(Error::UnknownRegion(r)) if r == "GB"
        ));
    }

    #[test]
    fn extra_demand_columns_are_ignored() {
        let column = DemandColumn::new("A", "Exports: re-export adjustment");
        assert_eq!(column.category, None);
        assert_eq!(
            "Changes in inventories".parse::<DemandCategory>().unwrap(),
            DemandCategory::InventoryChange
        );
    }

    #[test]
    fn account_rejects_negative_transactions() {
        let index = RegionSectorIndex::new(vec!["A".into()], vec!["s".into()]).unwrap();
        let z = DenseMatrix::from_rows(&[[-1.0]]).unwrap();
        let y = DenseMatrix::zeros(1, 0);
        assert!(matches!(
            MrioAccount::new(index, z, y, Vec::new(), vec![1.0], Vec::new(), 2012, "M.EUR"),
            Err(Error::NegativeEntry { .. })
        ));
    }
}
