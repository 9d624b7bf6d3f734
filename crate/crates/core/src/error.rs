use alloc::string::String;

/// Errors raised by the footprint kernels, the data model and the scenario engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("negative entry {value} in {context} at index {index}")]
    NegativeEntry {
        context: &'static str,
        index: usize,
        value: f64,
    },
    #[error("unproductive economy: {0}")]
    UnproductiveEconomy(String),
    #[error(
        "power iteration did not converge after {iterations} iterations \
         (spectral radius in [{lower}, {upper}], best estimate {estimate})"
    )]
    NonConvergence {
        iterations: usize,
        estimate: f64,
        lower: f64,
        upper: f64,
    },
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown sector `{0}`")]
    UnknownSector(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("no household count for type `{0}`")]
    MissingHouseholdType(String),
    #[error("sector `{sector}` in region `{region}` is unsorted but carries demand {value}")]
    UnsortedNonzeroDemand { sector: String, region: String, value: f64 },
    #[error("category `{0}` has zero baseline spending but a nonzero target")]
    ZeroBaselineNonzeroTarget(&'static str),
    #[error("cannot scale a zero base vector to nonzero total {0}")]
    ZeroBaseNonzeroTarget(f64),
    #[error("no scenario target for category `{0}`")]
    MissingCategoryTarget(&'static str),
    #[error("category `{0}` has both an explicit target and a government factor")]
    ConflictingTarget(&'static str),
    #[error("government spending table is empty or sums to zero")]
    EmptyCofogTable,
    #[error("invalid concordance: {0}")]
    InvalidConcordance(String),
    #[error("sector `{0}` has no sector group")]
    UnmappedSector(String),
    #[error("labour account lacks stressor for {0}")]
    MissingStressorLabel(String),
    #[error("material stressor `{0}` is not flagged used or unused")]
    UnflaggedStressor(String),
    #[error("embedded baseline footprint is zero; direct use cannot be scaled")]
    ZeroEmbeddedBase,
    #[error("unit mismatch: expected `{expected}`, found `{found}`")]
    UnitMismatch { expected: String, found: String },
    #[error("unknown extension `{0}`")]
    UnknownExtension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
