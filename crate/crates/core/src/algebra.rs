//! Leontief kernels: technical coefficients, the factorized `(I − A)` operator,
//! intensity vectors and footprint contractions.
//!
//! The model is the standard demand-driven one: `A = Z·diag(x)⁻¹`,
//! `q = (I − A)⁻¹·y` and `footprint = s·q`.
//!
//! `I − A` is a Z-matrix (non-positive off-diagonal) whenever `A ≥ 0`. For such
//! matrices Gaussian elimination without pivoting produces strictly positive
//! pivots exactly when every leading principal minor is positive, which is the
//! Hawkins–Simon condition for a productive economy. The factorization below
//! therefore doubles as a productivity test and never pivots.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm_inf, DenseMatrix};

/// Output below this value marks a sector as inactive.
pub const DEFAULT_OUTPUT_EPSILON: f64 = 1e-9;

/// Largest normwise relative residual `‖y − (I−A)q‖ / (‖I−A‖·‖q‖ + ‖y‖)` a solve may leave.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Input shares per unit of output; square, nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalCoefficients {
    entries: DenseMatrix,
}

impl TechnicalCoefficients {
    pub fn from_matrix(entries: DenseMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                context: "technical coefficients must be square",
                expected: entries.rows(),
                found: entries.cols(),
            });
        }
        if let Some((index, value)) = entries.first_negative() {
            return Err(Error::NegativeEntry {
                context: "technical coefficients",
                index,
                value,
            });
        }
        Ok(TechnicalCoefficients { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.entries
    }

    /// Columns whose sum is at least one. A productive economy has none; a
    /// nonempty list does not by itself prove the economy unproductive.
    pub fn hawkins_simon_violations(&self) -> Vec<usize> {
        self.entries
            .column_sums()
            .iter()
            .enumerate()
            .filter(|(_, s)| **s >= 1.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Final demand per region-sector. Entries are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandVector(Vec<f64>);

impl DemandVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeEntry {
                context: "demand vector",
                index,
                value,
            });
        }
        Ok(DemandVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        DemandVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Multiplies every entry by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "demand scale factor must be nonnegative, got {factor}"
            )));
        }
        Ok(DemandVector(self.0.iter().map(|v| v * factor).collect()))
    }

    pub fn add(&self, other: &DemandVector) -> Result<Self> {
        check_len("demand sum", self.len(), other.len())?;
        Ok(DemandVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }
}

/// Impact per unit of output for one stressor or a sum of stressors.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityVector {
    pub values: Vec<f64>,
    pub extension_name: String,
    pub unit: String,
}

impl IntensityVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entrywise sum of several intensity rows sharing a name and unit.
    pub fn sum<'a, I>(extension_name: &str, unit: &str, dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut values = vec![0.0; dim];
        for row in rows {
            check_len("intensity rows", dim, row.len())?;
            for (v, r) in values.iter_mut().zip(row) {
                *v += r;
            }
        }
        Ok(IntensityVector {
            values,
            extension_name: extension_name.into(),
            unit: unit.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    FactorizedSolve,
    ExplicitInverse,
}

/// `(I − A)` held as an LU factorization, optionally with the materialized inverse.
#[derive(Debug, Clone)]
pub struct LeontiefOperator {
    coefficients: TechnicalCoefficients,
    // Unit-lower L (strictly below the diagonal) and U packed in one matrix.
    lu: DenseMatrix,
    inverse: Option<DenseMatrix>,
    // ‖I − A‖∞, cached for the residual check.
    system_norm: f64,
}

impl LeontiefOperator {
    /// Factorizes `I − A`. Fails with `UnproductiveEconomy` when a pivot is not
    /// strictly positive.
    pub fn factorize(coefficients: TechnicalCoefficients) -> Result<Self> {
        let n = coefficients.dim();
        let mut lu = DenseMatrix::identity(n);
        for (dst, src) in lu.as_mut_slice().iter_mut().zip(coefficients.matrix().as_slice()) {
            *dst -= src;
        }
        let system_norm = lu.norm_inf();
        let pivot_floor = (n.max(1) as f64) * f64::EPSILON;

        for k in 0..n {
            let (upper, lower) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..];
            let pivot = pivot_row[k];
            if !(pivot > pivot_floor) {
                return Err(Error::UnproductiveEconomy(format!(
                    "pivot {pivot:e} at index {k} is not positive; \
                     a leading principal minor of (I - A) vanishes or is negative"
                )));
            }
            let tail = &pivot_row[k + 1..];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (r, p) in row[k + 1..].iter_mut().zip(tail) {
                        *r -= factor * p;
                    }
                }
            }
        }

        Ok(LeontiefOperator {
            coefficients,
            lu,
            inverse: None,
            system_norm,
        })
    }

    /// Factorizes and then materializes `L = (I − A)⁻¹`.
    pub fn with_explicit_inverse(coefficients: TechnicalCoefficients) -> Result<Self> {
        let mut op = Self::factorize(coefficients)?;
        let n = op.dim();
        let mut inverse = DenseMatrix::zeros(n, n);
        let mut unit = vec![0.0; n];
        for j in 0..n {
            unit.iter_mut().for_each(|v| *v = 0.0);
            unit[j] = 1.0;
            let col = op.substitute(&unit);
            for (i, v) in col.into_iter().enumerate() {
                inverse[(i, j)] = v;
            }
        }
        op.inverse = Some(inverse);
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim()
    }

    pub fn mode(&self) -> SolveMode {
        if self.inverse.is_some() {
            SolveMode::ExplicitInverse
        } else {
            SolveMode::FactorizedSolve
        }
    }

    pub fn coefficients(&self) -> &TechnicalCoefficients {
        &self.coefficients
    }

    /// The stored inverse, present only in explicit-inverse mode.
    pub fn inverse(&self) -> Option<&DenseMatrix> {
        self.inverse.as_ref()
    }

    /// Gross output `q` with `(I − A)·q = y`, residual-checked.
    pub fn solve(&self, demand: &[f64]) -> Result<Vec<f64>> {
        check_len("Leontief solve", self.dim(), demand.len())?;
        let output = match &self.inverse {
            Some(inverse) => inverse.mul_vec(demand)?,
            None => self.substitute(demand),
        };
        let residual = self.relative_residual(demand, &output);
        if !(residual <= RESIDUAL_TOLERANCE) {
            return Err(Error::UnproductiveEconomy(format!(
                "relative residual {residual:e} exceeds {RESIDUAL_TOLERANCE:e}"
            )));
        }
        Ok(output)
    }

    /// Normwise relative residual of a candidate solution.
    pub fn relative_residual(&self, demand: &[f64], output: &[f64]) -> f64 {
        let a = self.coefficients.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let r = demand[i] - (output[i] - dot(a.row(i), output));
            worst = worst.max(r.abs());
        }
        let scale = self.system_norm * norm_inf(output) + norm_inf(demand);
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    fn substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = rhs.to_vec();
        for i in 0..n {
            let row = self.lu.row(i);
            x[i] -= dot(&row[..i], &x[..i]);
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

/// `A[i][j] = Z[i][j] / x[j]`, with columns of inactive sectors (`x[j] ≤ epsilon`) zeroed.
pub fn technical_coefficients(
    transactions: &DenseMatrix,
    output: &[f64],
    epsilon: f64,
) -> Result<TechnicalCoefficients> {
    let n = output.len();
    check_len("transaction rows vs output", n, transactions.rows())?;
    check_len("transaction columns vs output", n, transactions.cols())?;
    if let Some((index, value)) = transactions.first_negative() {
        return Err(Error::NegativeEntry {
            context: "transaction matrix",
            index,
            value,
        });
    }
    if let Some((index, &value)) = output.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeEntry {
            context: "total output",
            index,
            value,
        });
    }
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for ((dst, z), &x) in a.row_mut(i).iter_mut().zip(transactions.row(i)).zip(output) {
            *dst = if x > epsilon { z / x } else { 0.0 };
        }
    }
    TechnicalCoefficients::from_matrix(a)
}

/// One-shot factorize-and-solve.
pub fn leontief_solve(coefficients: &TechnicalCoefficients, demand: &DemandVector) -> Result<Vec<f64>> {
    LeontiefOperator::factorize(coefficients.clone())?.solve(demand.as_slice())
}

pub fn leontief_inverse(coefficients: &TechnicalCoefficients) -> Result<LeontiefOperator> {
    LeontiefOperator::with_explicit_inverse(coefficients.clone())
}

/// `s[j] = e[j] / x[j]`, zero where output is at or below `epsilon`.
pub fn intensity(
    extension_name: &str,
    unit: &str,
    extension: &[f64],
    output: &[f64],
    epsilon: f64,
) -> Result<IntensityVector> {
    check_len("extension row vs output", output.len(), extension.len())?;
    let values = extension
        .iter()
        .zip(output)
        .map(|(&e, &x)| if x > epsilon { e / x } else { 0.0 })
        .collect();
    Ok(IntensityVector {
        values,
        extension_name: extension_name.into(),
        unit: unit.into(),
    })
}

pub fn footprint_total(intensity: &IntensityVector, output: &[f64]) -> Result<f64> {
    Ok(footprint_by_source(intensity, output)?.iter().sum())
}

/// Contribution of each producing region-sector: `s[j]·q[j]`.
pub fn footprint_by_source(intensity: &IntensityVector, output: &[f64]) -> Result<Vec<f64>> {
    check_len("footprint contraction", intensity.len(), output.len())?;
    Ok(intensity.values.iter().zip(output).map(|(s, q)| s * q).collect())
}

/// Tuning for [`productivity_check`].
#[derive(Debug, Clone, Copy)]
pub struct PowerIterationConfig {
    pub max_iterations: usize,
    /// Stop once the Collatz–Wielandt bracket is narrower than this.
    pub tolerance: f64,
    /// Productive iff the estimate is below `1 − margin`.
    pub margin: f64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        PowerIterationConfig {
            max_iterations: 10_000,
            tolerance: 1e-9,
            margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub productive: bool,
}

/// Power-iteration estimate of `ρ(A)` for nonnegative `A`.
///
/// Iterates on `A + I`, whose Perron root is `ρ(A) + 1` and which is never
/// periodic, and brackets the root with the Collatz–Wielandt bounds
/// `min (Bv)ᵢ/vᵢ ≤ ρ(B) ≤ max (Bv)ᵢ/vᵢ` for positive `v`.
pub fn productivity_check(
    coefficients: &TechnicalCoefficients,
    config: PowerIterationConfig,
) -> Result<SpectralRadius> {
    let a = coefficients.matrix();
    let n = coefficients.dim();
    if n == 0 {
        return Ok(SpectralRadius {
            estimate: 0.0,
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
            productive: true,
        });
    }
    let mut v = vec![1.0; n];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let w: Vec<f64> = (0..n).map(|i| dot(a.row(i), &v) + v[i]).collect();
        lower = f64::INFINITY;
        upper = 0.0;
        for (wi, vi) in w.iter().zip(&v) {
            let ratio = wi / vi;
            lower = lower.min(ratio);
            upper = upper.max(ratio);
        }
        let scale = norm_inf(&w);
        v = w.into_iter().map(|x| x / scale).collect();
        if upper - lower <= config.tolerance {
            let estimate = 0.5 * (lower + upper) - 1.0;
            return Ok(SpectralRadius {
                estimate,
                lower: lower - 1.0,
                upper: upper - 1.0,
                iterations: iteration,
                productive: estimate < 1.0 - config.margin,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        estimate: 0.5 * (lower + upper) - 1.0,
        lower: lower - 1.0,
        upper: upper - 1.0,
    })
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
