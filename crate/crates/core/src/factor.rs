//! Factor-space schema: the discrete attribute hypercube every other module
//! operates on.
//!
//! A [`FactorSpace`] is an ordered list of [`FactorSpec`]s. The list order
//! fixes the canonical factor indexing used by every [`Assignment`]. Factors
//! are partitioned into task-relevant ones (the coordinates splits key on)
//! and task-irrelevant ones (carried through untouched).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One discrete generative factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    /// Number of discrete values, indexed `0..cardinality`.
    pub cardinality: usize,
    pub task_relevant: bool,
    /// Whether the values carry a natural order (e.g. size, position).
    #[serde(default)]
    pub ordered: bool,
}

/// Schema file shape: `{ "factors": [ ... ] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SchemaFile {
    factors: Vec<FactorSpec>,
}

/// An ordered, validated list of factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaFile", into = "SchemaFile")]
pub struct FactorSpace {
    factors: Vec<FactorSpec>,
    task_relevant: Vec<usize>,
}

impl TryFrom<SchemaFile> for FactorSpace {
    type Error = Error;
    fn try_from(file: SchemaFile) -> Result<Self> {
        FactorSpace::new(file.factors)
    }
}

impl From<FactorSpace> for SchemaFile {
    fn from(space: FactorSpace) -> Self {
        SchemaFile {
            factors: space.factors,
        }
    }
}

impl FactorSpace {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.cardinality == 0 {
                return Err(Error::ZeroCardinality(f.name.clone()));
            }
            if f.task_relevant && f.cardinality < 2 {
                return Err(Error::CardinalityTooSmall {
                    name: f.name.clone(),
                    cardinality: f.cardinality,
                });
            }
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::DuplicateFactorName(f.name.clone()));
            }
        }
        let task_relevant: Vec<usize> = factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.task_relevant)
            .map(|(i, _)| i)
            .collect();
        if task_relevant.is_empty() {
            return Err(Error::NoTaskRelevantFactors);
        }
        Ok(Self {
            factors,
            task_relevant,
        })
    }

    /// Load a schema file (see the crate docs for the JSON shape).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemaFile = serde_json::from_str(text)?;
        Self::new(file.factors)
    }

    pub fn to_json(&self) -> String {
        let file = SchemaFile {
            factors: self.factors.clone(),
        };
        serde_json::to_string_pretty(&file).expect("schema serialization cannot fail")
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> &FactorSpec {
        &self.factors[index]
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Indices of the task-relevant factors, in canonical order.
    pub fn task_relevant_indices(&self) -> &[usize] {
        &self.task_relevant
    }

    /// Number of task-relevant factors (`I`).
    pub fn num_task_relevant(&self) -> usize {
        self.task_relevant.len()
    }

    /// Number of task-irrelevant factors (`J`).
    pub fn num_irrelevant(&self) -> usize {
        self.factors.len() - self.task_relevant.len()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Number of assignments in the full Cartesian product, if it fits u128.
    pub fn grid_size(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, f| acc.saturating_mul(f.cardinality as u128))
    }

    /// Size of the task-relevant sub-grid.
    pub fn task_relevant_grid_size(&self) -> u128 {
        self.task_relevant.iter().fold(1u128, |acc, &i| {
            acc.saturating_mul(self.factors[i].cardinality as u128)
        })
    }

    /// A new space containing only the task-relevant factors (all kept
    /// task-relevant, order preserved).
    pub fn restrict_to_task_relevant(&self) -> FactorSpace {
        let factors = self
            .task_relevant
            .iter()
            .map(|&i| self.factors[i].clone())
            .collect();
        FactorSpace::new(factors).expect("restriction of a valid space is valid")
    }

    /// A copy of this space where only `keep` are task-relevant.
    ///
    /// Used to express a split "restricted to G = keep": the factors stay in
    /// place, only the relevance flags change.
    pub fn with_task_relevant(&self, keep: &[usize]) -> Result<FactorSpace> {
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| FactorSpec {
                task_relevant: keep.contains(&i),
                ..f.clone()
            })
            .collect();
        FactorSpace::new(factors)
    }
}

/// One point of the factor hypercube: a value index per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<u16>);

impl Assignment {
    pub fn new(values: Vec<u16>, space: &FactorSpace) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::AssignmentLength {
                expected: space.len(),
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            let spec = space.factor(i);
            if v as usize >= spec.cardinality {
                return Err(Error::InvalidValue {
                    factor: spec.name.clone(),
                    value: v as u64,
                    cardinality: spec.cardinality,
                });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[u16] {
        &self.0
    }

    pub fn value(&self, factor: usize) -> u16 {
        self.0[factor]
    }

    /// Values at the given factor indices, in the given order.
    pub fn project(&self, indices: &[usize]) -> Vec<u16> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}
