//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- factor space / schema ---
    #[error("duplicate factor name `{0}`")]
    DuplicateFactorName(String),
    #[error("factor `{0}` has cardinality 0")]
    ZeroCardinality(String),
    #[error("task-relevant factor `{name}` must have cardinality >= 2 (got {cardinality})")]
    CardinalityTooSmall { name: String, cardinality: usize },
    #[error("factor space has no task-relevant factors")]
    NoTaskRelevantFactors,
    #[error("assignment has {got} values but the space has {expected} factors")]
    AssignmentLength { expected: usize, got: usize },
    #[error("value {value} out of range for factor `{factor}` (cardinality {cardinality})")]
    InvalidValue {
        factor: String,
        value: u64,
        cardinality: usize,
    },

    // --- dataset ingestion ---
    #[error(
        "row {row}: value {value} out of range for factor `{factor}` (cardinality {cardinality})"
    )]
    ValueOutOfRange {
        row: usize,
        factor: String,
        value: u64,
        cardinality: usize,
    },
    #[error("duplicate sample id `{0}`")]
    DuplicateSampleId(String),
    #[error("missing column `{0}` in dataset header")]
    MissingColumn(String),
    #[error("dataset header mismatch: expected `{expected}`, got `{got}`")]
    HeaderMismatch { expected: String, got: String },
    #[error("row {row}: cell `{cell}` is not a non-negative integer")]
    BadCell { row: usize, cell: String },
    #[error("synthetic grid of {rows} rows exceeds the budget of {budget}")]
    BudgetExceeded { rows: u128, budget: u64 },

    // --- splits ---
    #[error("c = {c} out of range for a space with {i} task-relevant factors")]
    InvalidC { c: usize, i: usize },
    #[error("subspace count {n} out of range [1, {max}]")]
    SubspaceCountOutOfRange { n: usize, max: u64 },
    #[error("invalid exclusion interval on factor {factor_index}: start {start}, length {length}, cardinality {cardinality}")]
    InvalidInterval {
        factor_index: usize,
        start: usize,
        length: usize,
        cardinality: usize,
    },
    #[error("exclusion interval targets factor {0}, which is not task-relevant")]
    IntervalOnIrrelevantFactor(usize),
    #[error("exclusion spec must cover each task-relevant factor exactly once")]
    IncompleteExclusionSpec,
    #[error("fraction {0} outside the open interval (0, 1)")]
    InvalidFraction(f64),
    #[error("fractional exclusion size v = {0} outside [0, 1]")]
    InvalidExclusionSize(f64),
    #[error("split excludes every sample; training set would be empty")]
    EmptyTrain,
    #[error("holdout split needs at least 2 samples (got {0})")]
    TooFewSamples(usize),
    #[error("calibration is degenerate: only one candidate exclusion exists")]
    DegenerateCalibration,
    #[error("pair ({0}, {1}) must name two distinct task-relevant factors")]
    InvalidPair(usize, usize),
    #[error("balance weight {0} must be >= 0")]
    InvalidBalanceWeight(f64),
    #[error("excluded count {count} out of range [1, {max}] for factor {factor_index}")]
    ExcludedCountOutOfRange {
        factor_index: usize,
        count: usize,
        max: usize,
    },

    // --- verification & metrics ---
    #[error("train assignment set is empty")]
    EmptyTrainSet,
    #[error("split ids are inconsistent with the dataset: {0}")]
    InconsistentSplit(String),
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("lambda must be > 0 (got {0})")]
    InvalidLambda(f64),

    // --- encodings ---
    #[error("embedding dimension {0} must be even and >= 4")]
    InvalidDim(usize),
    #[error("phase std {0} must be > 0")]
    InvalidPhaseStd(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("kernel curve does not contain delta = 0")]
    MissingZeroDelta,
    #[error("kernel curve is degenerate (constant)")]
    DegenerateCurve,
    #[error("query vector has zero norm")]
    ZeroNormQuery,
    #[error("holistic arity n = {n} out of range [2, {i}]")]
    InvalidHolisticN { n: usize, i: usize },
    #[error("need at least {min} trials (got {got})")]
    TooFewTrials { min: usize, got: usize },
    #[error("codebook for factor `{0}` not found")]
    UnknownAttribute(String),

    // --- networks ---
    #[error("invalid network dimension: {0}")]
    InvalidNetDim(&'static str),
    #[error("label {label} out of range for attribute {attribute} ({classes} classes)")]
    LabelOutOfRange {
        attribute: usize,
        label: usize,
        classes: usize,
    },
    #[error("input has {got} features, network expects {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("parameter descriptor fields must be positive")]
    InvalidDescriptor,

    // --- assets ---
    #[error("unknown built-in asset `{0}`")]
    UnknownAsset(String),
    #[error("no thresholds for dataset `{dataset}` at c = {c}")]
    NoThresholdRow { dataset: String, c: usize },

    // --- io ---
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
