//! Built-in assets: the six dataset schema fixtures, the per-dataset
//! attribute-wise exclusion thresholds, and the FPE phase-std defaults.
//!
//! Thresholds follow the "lowest index excluded" convention: a threshold t
//! on a factor of cardinality n excludes the value interval [t, n).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorSpace;
use crate::fpe::AttributeCodebookConfig;
use crate::orthotopic::{ExclusionInterval, ExclusionSpec};

const SCHEMAS: &[(&str, &str)] = &[
    ("cars3d", include_str!("../assets/schemas/cars3d.json")),
    ("clevr", include_str!("../assets/schemas/clevr.json")),
    ("dsprites", include_str!("../assets/schemas/dsprites.json")),
    ("iraven", include_str!("../assets/schemas/iraven.json")),
    ("mpi3d", include_str!("../assets/schemas/mpi3d.json")),
    ("shapes3d", include_str!("../assets/schemas/shapes3d.json")),
];

const THRESHOLDS: &str = include_str!("../assets/exclusion_thresholds.json");
const FPE_DEFAULTS: &str = include_str!("../assets/fpe_defaults.json");

/// Names of the shipped dataset schemas.
pub fn builtin_schema_names() -> Vec<&'static str> {
    SCHEMAS.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a shipped schema.
pub fn builtin_schema_json(name: &str) -> Result<&'static str> {
    SCHEMAS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownAsset(name.to_string()))
}

/// Load a shipped schema as a validated factor space.
pub fn builtin_space(name: &str) -> Result<FactorSpace> {
    FactorSpace::from_json(builtin_schema_json(name)?)
}

/// One threshold row: thresholds keyed by factor name.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ThresholdRow {
    pub c: usize,
    pub thresholds: BTreeMap<String, usize>,
}

type ThresholdTable = BTreeMap<String, Vec<ThresholdRow>>;

fn threshold_table() -> &'static ThresholdTable {
    static TABLE: OnceLock<ThresholdTable> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(THRESHOLDS).expect("shipped thresholds parse"))
}

/// Threshold rows for one dataset.
pub fn threshold_rows(dataset: &str) -> Result<&'static [ThresholdRow]> {
    threshold_table()
        .get(dataset)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::UnknownAsset(dataset.to_string()))
}

/// The shipped thresholds for (dataset, c), resolved to explicit intervals
/// on `space`. A threshold t excludes [t, cardinality).
pub fn threshold_intervals(
    dataset: &str,
    c: usize,
    space: &FactorSpace,
) -> Result<Vec<ExclusionInterval>> {
    let rows = threshold_rows(dataset)?;
    let row = rows
        .iter()
        .find(|r| r.c == c)
        .ok_or_else(|| Error::NoThresholdRow {
            dataset: dataset.to_string(),
            c,
        })?;
    let mut intervals = Vec::with_capacity(row.thresholds.len());
    for (name, &t) in &row.thresholds {
        let f = space
            .factor_index(name)
            .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
        let cardinality = space.factor(f).cardinality;
        if t >= cardinality {
            return Err(Error::InvalidInterval {
                factor_index: f,
                start: t,
                length: 0,
                cardinality,
            });
        }
        intervals.push(ExclusionInterval::new(f, t, cardinality - t, space)?);
    }
    intervals.sort_by_key(|iv| iv.factor_index);
    Ok(intervals)
}

/// Same as [`threshold_intervals`] wrapped as an explicit spec.
pub fn threshold_spec(dataset: &str, c: usize, space: &FactorSpace) -> Result<ExclusionSpec> {
    Ok(ExclusionSpec::Explicit {
        intervals: threshold_intervals(dataset, c, space)?,
    })
}

/// FPE defaults: phase std chosen by whether the attribute is graded.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct FpeDefaults {
    pub note: String,
    pub graded_phase_std: f64,
    pub ungraded_phase_std: f64,
    pub alpha: f64,
}

pub fn fpe_defaults() -> &'static FpeDefaults {
    static DEFAULTS: OnceLock<FpeDefaults> = OnceLock::new();
    DEFAULTS.get_or_init(|| serde_json::from_str(FPE_DEFAULTS).expect("shipped defaults parse"))
}

/// Default per-attribute codebook configs for a space: ordered attributes
/// get the graded phase std, unordered ones the ungraded std.
pub fn default_fpe_configs(
    space: &FactorSpace,
    dim: usize,
    seed: u64,
) -> Vec<AttributeCodebookConfig> {
    let defaults = fpe_defaults();
    space
        .task_relevant_indices()
        .iter()
        .map(|&f| {
            let spec = space.factor(f);
            AttributeCodebookConfig {
                name: spec.name.clone(),
                cardinality: spec.cardinality,
                dim,
                phase_std: if spec.ordered {
                    defaults.graded_phase_std
                } else {
                    defaults.ungraded_phase_std
                },
                alpha: defaults.alpha,
                seed: crate::seeding::derive_seed(seed, &[f as u64]),
            }
        })
        .collect()
}
