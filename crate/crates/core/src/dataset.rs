//! Dataset tables: factor annotations keyed by sample id, plus synthetic
//! full-grid generation and validation reporting.
//!
//! A table is just the factor labels of a dataset; pixels never enter the
//! toolkit. Tables may be full Cartesian grids (one or more samples per
//! assignment) or sparse.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{Assignment, FactorSpace};

/// Default cap on synthetic grid rows.
pub const DEFAULT_ROW_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub id: String,
    pub assignment: Assignment,
}

/// A validated mapping sample-id -> factor assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetTable {
    space: FactorSpace,
    rows: Vec<Row>,
}

impl DatasetTable {
    /// Build a table, checking id uniqueness. Assignments are assumed to be
    /// already validated against `space` (they can only be built that way).
    pub fn new(space: FactorSpace, rows: Vec<Row>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        for row in &rows {
            if !seen.insert(row.id.as_str()) {
                return Err(Error::DuplicateSampleId(row.id.clone()));
            }
            if row.assignment.values().len() != space.len() {
                return Err(Error::AssignmentLength {
                    expected: space.len(),
                    got: row.assignment.values().len(),
                });
            }
        }
        drop(seen);
        Ok(Self { space, rows })
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Load a CSV dataset with header `sample_id,<factor>,...` matching the
    /// space's factor names in order. Row order is preserved.
    pub fn load(path: impl AsRef<Path>, space: &FactorSpace) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text, space)
    }

    pub fn from_csv(text: &str, space: &FactorSpace) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let mut expected = vec!["sample_id".to_string()];
        expected.extend(space.factors().iter().map(|f| f.name.clone()));
        let got: Vec<String> = headers.iter().map(str::to_string).collect();
        if got != expected {
            // Point at the first absent factor column when that is the problem.
            for name in &expected {
                if !got.iter().any(|h| h == name) {
                    return Err(Error::MissingColumn(name.clone()));
                }
            }
            return Err(Error::HeaderMismatch {
                expected: expected.join(","),
                got: got.join(","),
            });
        }

        let mut rows = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let row_no = idx + 1;
            let id = record
                .get(0)
                .ok_or_else(|| Error::MissingColumn("sample_id".into()))?
                .to_string();
            let mut values = Vec::with_capacity(space.len());
            for (f, spec) in space.factors().iter().enumerate() {
                let cell = record.get(f + 1).unwrap_or("");
                let value: u64 = cell.trim().parse().map_err(|_| Error::BadCell {
                    row: row_no,
                    cell: cell.to_string(),
                })?;
                if value >= spec.cardinality as u64 {
                    return Err(Error::ValueOutOfRange {
                        row: row_no,
                        factor: spec.name.clone(),
                        value,
                        cardinality: spec.cardinality,
                    });
                }
                values.push(value as u16);
            }
            let assignment = Assignment::new(values, space)?;
            rows.push(Row { id, assignment });
        }
        Self::new(space.clone(), rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id");
        for f in self.space.factors() {
            out.push(',');
            out.push_str(&f.name);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.id);
            for v in row.assignment.values() {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Ids in table order.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.id.as_str())
    }
}

/// Generate the full Cartesian grid with `samples_per_assignment` replicas.
///
/// Ids are `g{assignment_index}_{replica}` with the last factor varying
/// fastest, so output is deterministic; `seed` is recorded by callers for
/// provenance only.
pub fn synth_grid(
    space: &FactorSpace,
    samples_per_assignment: usize,
    seed: u64,
) -> Result<DatasetTable> {
    synth_grid_with_budget(space, samples_per_assignment, seed, DEFAULT_ROW_BUDGET)
}

pub fn synth_grid_with_budget(
    space: &FactorSpace,
    samples_per_assignment: usize,
    _seed: u64,
    budget: u64,
) -> Result<DatasetTable> {
    assert!(
        samples_per_assignment > 0,
        "samples_per_assignment must be positive"
    );
    let total = space
        .grid_size()
        .saturating_mul(samples_per_assignment as u128);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            rows: total,
            budget,
        });
    }
    let cards: Vec<usize> = space.factors().iter().map(|f| f.cardinality).collect();
    let mut rows = Vec::with_capacity(total as usize);
    let mut values = vec![0u16; cards.len()];
    let mut index = 0usize;
    loop {
        for replica in 0..samples_per_assignment {
            rows.push(Row {
                id: format!("g{index}_{replica}"),
                assignment: Assignment::new(values.clone(), space)
                    .expect("generated assignment is in range"),
            });
        }
        index += 1;
        // odometer increment, last factor fastest
        let mut pos = cards.len();
        loop {
            if pos == 0 {
                return DatasetTable::new(space.clone(), rows);
            }
            pos -= 1;
            values[pos] += 1;
            if (values[pos] as usize) < cards[pos] {
                break;
            }
            values[pos] = 0;
        }
    }
}

/// Per-factor value coverage inside a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCoverage {
    pub factor: String,
    pub observed: Vec<usize>,
    pub missing: Vec<usize>,
}

/// Report produced by [`validate_dataset`]; informational, never an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: usize,
    pub distinct_assignments: usize,
    /// Rows beyond the first occurrence of their assignment.
    pub duplicate_assignment_rows: usize,
    /// Assignments in the full Cartesian product (None if it overflows u64).
    pub possible_assignments: Option<u64>,
    /// distinct / possible; 0 for an empty grid.
    pub sparsity: f64,
    pub coverage: Vec<FactorCoverage>,
    pub coverage_complete: bool,
}

pub fn validate_dataset(table: &DatasetTable) -> ValidationReport {
    let space = table.space();
    let mut seen_values: Vec<Vec<bool>> = space
        .factors()
        .iter()
        .map(|f| vec![false; f.cardinality])
        .collect();
    let mut counts: HashMap<&[u16], usize> = HashMap::new();
    for row in table.rows() {
        let vals = row.assignment.values();
        *counts.entry(vals).or_insert(0) += 1;
        for (f, &v) in vals.iter().enumerate() {
            seen_values[f][v as usize] = true;
        }
    }
    let distinct = counts.len();
    let duplicates = table.len() - distinct;
    let possible_u128 = space.grid_size();
    let possible = u64::try_from(possible_u128).ok();
    let sparsity = if possible_u128 == 0 {
        0.0
    } else {
        distinct as f64 / possible_u128 as f64
    };
    let coverage: Vec<FactorCoverage> = space
        .factors()
        .iter()
        .zip(&seen_values)
        .map(|(f, seen)| FactorCoverage {
            factor: f.name.clone(),
            observed: seen
                .iter()
                .enumerate()
                .filter(|(_, &s)| s)
                .map(|(v, _)| v)
                .collect(),
            missing: seen
                .iter()
                .enumerate()
                .filter(|(_, &s)| !s)
                .map(|(v, _)| v)
                .collect(),
        })
        .collect();
    let coverage_complete = coverage.iter().all(|c| c.missing.is_empty());
    ValidationReport {
        rows: table.len(),
        distinct_assignments: distinct,
        duplicate_assignment_rows: duplicates,
        possible_assignments: possible,
        sparsity,
        coverage,
        coverage_complete,
    }
}

/// Group row indices by task-relevant assignment, in first-seen order.
pub(crate) fn group_by_task_relevant(table: &DatasetTable) -> BTreeMap<Vec<u16>, Vec<usize>> {
    let tr = table.space().task_relevant_indices();
    let mut groups: BTreeMap<Vec<u16>, Vec<usize>> = BTreeMap::new();
    for (i, row) in table.rows().iter().enumerate() {
        groups
            .entry(row.assignment.project(tr))
            .or_default()
            .push(i);
    }
    groups
}
