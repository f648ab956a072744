//! Brute-force verification of splits against the compositional-generalization
//! definition, split statistics, run-count accounting, and evaluation metrics.
//!
//! The verifier is the oracle: every report is recomputed from the raw id
//! sets. Split configs are only ever used as a hypothesis whose structure is
//! re-validated against the data before any shortcut is taken.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::dataset::DatasetTable;
use crate::error::{Error, Result};
use crate::factor::{Assignment, FactorSpace};
use crate::orthotopic::{SplitMode, SplitResult, Subspace, SubspaceSelection};

/// kappa: the maximum number of task-relevant coordinates a test assignment
/// shares with any training assignment.
pub fn kappa(test: &Assignment, train: &[Assignment], space: &FactorSpace) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let tr = space.task_relevant_indices();
    let mut best = 0;
    for t in train {
        let m = tr.iter().filter(|&&f| t.value(f) == test.value(f)).count();
        if m > best {
            best = m;
            if best == tr.len() {
                break;
            }
        }
    }
    Ok(best)
}

fn kappa_tr(test: &[u16], train: &HashSet<Vec<u16>>, early_exit: usize) -> usize {
    let mut best = 0;
    for t in train {
        let m = t.iter().zip(test).filter(|(a, b)| a == b).count();
        if m > best {
            best = m;
            if best >= early_exit {
                break;
            }
        }
    }
    best
}

/// One compliance violation: a test assignment whose kappa escapes [c, I-1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaViolation {
    /// Task-relevant assignment values (canonical factor order).
    pub assignment: Vec<u16>,
    pub kappa: usize,
    /// "lower" (kappa < c) or "upper" (kappa > I-1).
    pub bound: String,
}

/// kappa of one distinct test assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaValue {
    /// Task-relevant assignment values (canonical factor order).
    pub assignment: Vec<u16>,
    pub kappa: usize,
}

/// Distribution of kappa over the distinct test assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub min_kappa: Option<usize>,
    pub max_kappa: Option<usize>,
    /// histogram[k] = number of distinct test assignments with kappa = k,
    /// for k in 0..=I.
    pub histogram: Vec<usize>,
    /// One entry per distinct test assignment, sorted by assignment.
    pub per_assignment: Vec<KappaValue>,
}

/// Result of checking a split against `c <= kappa <= I-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub c: usize,
    pub i: usize,
    pub satisfied: bool,
    /// True when the test set was empty and the check passed vacuously.
    pub vacuous: bool,
    pub distinct_test_assignments: usize,
    pub kappa: KappaReport,
    pub violations: Vec<KappaViolation>,
    /// "structured" when the corner-box structure was re-derived from the
    /// data and kappa followed analytically; "scan" for the exhaustive
    /// fallback.
    pub method: String,
}

/// Check that every distinct test assignment shares at least c and at
/// most I-1 task-relevant coordinates with its nearest training assignment.
///
/// kappa is recomputed for every distinct test assignment. On full grids
/// whose train/test sides exactly match the corner-box structure implied by
/// the split config, kappa follows analytically from the number of excluded
/// coordinates (kappa = I + c - |E|); the structure is verified against
/// every row first, and any mismatch falls back to the exhaustive scan.
pub fn check_compliance(
    split: &SplitResult,
    table: &DatasetTable,
    c: usize,
) -> Result<ComplianceReport> {
    let space = table.space();
    let i_count = space.num_task_relevant();
    if c >= i_count {
        return Err(Error::InvalidC { c, i: i_count });
    }
    let (train_rows, test_rows) = split_rows(split, table)?;
    let tr = space.task_relevant_indices();

    let mut train_set: HashSet<Vec<u16>> = HashSet::new();
    for &r in &train_rows {
        train_set.insert(table.rows()[r].assignment.project(tr));
    }
    let mut test_set: HashSet<Vec<u16>> = HashSet::new();
    for &r in &test_rows {
        test_set.insert(table.rows()[r].assignment.project(tr));
    }

    if test_set.is_empty() {
        return Ok(ComplianceReport {
            c,
            i: i_count,
            satisfied: true,
            vacuous: true,
            distinct_test_assignments: 0,
            kappa: KappaReport {
                min_kappa: None,
                max_kappa: None,
                histogram: vec![0; i_count + 1],
                per_assignment: Vec::new(),
            },
            violations: Vec::new(),
            method: "scan".into(),
        });
    }
    if train_set.is_empty() {
        return Err(Error::EmptyTrainSet);
    }

    let structured = structured_kappas(split, table, c, &train_set, &test_set);
    let (kappas, method): (Vec<(Vec<u16>, usize)>, &str) = match structured {
        Some(k) => (k, "structured"),
        None => {
            let mut out: Vec<(Vec<u16>, usize)> = test_set
                .iter()
                .map(|u| (u.clone(), kappa_tr(u, &train_set, i_count)))
                .collect();
            out.sort();
            (out, "scan")
        }
    };

    let mut histogram = vec![0usize; i_count + 1];
    let mut min_k = usize::MAX;
    let mut max_k = 0usize;
    let mut violations = Vec::new();
    for (assignment, k) in &kappas {
        histogram[*k] += 1;
        min_k = min_k.min(*k);
        max_k = max_k.max(*k);
        if *k < c {
            violations.push(KappaViolation {
                assignment: assignment.clone(),
                kappa: *k,
                bound: "lower".into(),
            });
        } else if *k > i_count - 1 {
            violations.push(KappaViolation {
                assignment: assignment.clone(),
                kappa: *k,
                bound: "upper".into(),
            });
        }
    }
    let per_assignment: Vec<KappaValue> = kappas
        .into_iter()
        .map(|(assignment, kappa)| KappaValue { assignment, kappa })
        .collect();
    Ok(ComplianceReport {
        c,
        i: i_count,
        satisfied: violations.is_empty(),
        vacuous: false,
        distinct_test_assignments: per_assignment.len(),
        kappa: KappaReport {
            min_kappa: Some(min_k),
            max_kappa: Some(max_k),
            histogram,
            per_assignment,
        },
        violations,
        method: method.into(),
    })
}

/// Try the analytic corner-box route. Returns None unless the config's
/// structure is exactly confirmed by the data.
fn structured_kappas(
    split: &SplitResult,
    table: &DatasetTable,
    c: usize,
    train_set: &HashSet<Vec<u16>>,
    test_set: &HashSet<Vec<u16>>,
) -> Option<Vec<(Vec<u16>, usize)>> {
    let space = table.space();
    let tr = space.task_relevant_indices();
    let i_count = tr.len();
    let config = &split.config;
    if config.mode != SplitMode::Compositional
        || config.selection != SubspaceSelection::All
        || config.c != c
        || config.intervals.len() != i_count
    {
        return None;
    }
    // Untrusted intervals: re-validate before use.
    let mut interval_of: HashMap<usize, (usize, usize)> = HashMap::new();
    for iv in &config.intervals {
        if iv.validate(space).is_err() {
            return None;
        }
        interval_of.insert(iv.factor_index, (iv.start, iv.start + iv.length));
    }
    if !tr.iter().all(|f| interval_of.contains_key(f)) {
        return None;
    }
    // Full grid on the task-relevant projection?
    let grid = space.task_relevant_grid_size();
    let distinct = train_set.len() + test_set.len();
    if train_set.intersection(test_set).next().is_some() {
        return None;
    }
    if grid > usize::MAX as u128 || distinct as u128 != grid {
        return None;
    }
    // Every distinct assignment must land on the side the box structure
    // predicts: test iff at least c+1 coordinates are excluded.
    let excluded_count = |a: &[u16]| -> usize {
        tr.iter()
            .enumerate()
            .filter(|(pos, f)| {
                let (lo, hi) = interval_of[*f];
                let v = a[*pos] as usize;
                v >= lo && v < hi
            })
            .count()
    };
    for a in train_set {
        if excluded_count(a) > c {
            return None;
        }
    }
    let mut out = Vec::with_capacity(test_set.len());
    for a in test_set {
        let e = excluded_count(a);
        if e <= c {
            return None;
        }
        out.push((a.clone(), i_count + c - e));
    }
    out.sort();
    Some(out)
}

/// Per-factor values observed in the training split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainCoverage {
    pub factor: String,
    pub task_relevant: bool,
    pub covered: Vec<bool>,
}

/// Per-subspace fraction of observed value combinations absent from train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceExclusionStat {
    pub factor_indices: Vec<usize>,
    pub excluded_fraction: f64,
}

/// Split statistics, always recomputed from the id sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub coverage: Vec<TrainCoverage>,
    pub subspace_exclusion: Vec<SubspaceExclusionStat>,
}

pub(crate) fn compute_stats(
    table: &DatasetTable,
    train_rows: &[usize],
    test_rows: &[usize],
    subspaces: &[Subspace],
) -> SplitStats {
    let space = table.space();
    let n = table.len();
    let mut covered: Vec<Vec<bool>> = space
        .factors()
        .iter()
        .map(|f| vec![false; f.cardinality])
        .collect();
    for &r in train_rows {
        for (f, &v) in table.rows()[r].assignment.values().iter().enumerate() {
            covered[f][v as usize] = true;
        }
    }
    let coverage = space
        .factors()
        .iter()
        .zip(covered)
        .map(|(f, c)| TrainCoverage {
            factor: f.name.clone(),
            task_relevant: f.task_relevant,
            covered: c,
        })
        .collect();

    let mut subspace_exclusion = Vec::with_capacity(subspaces.len());
    for s in subspaces {
        let idx = s.factor_indices();
        let mut seen: HashSet<Vec<u16>> = HashSet::new();
        for row in table.rows() {
            seen.insert(row.assignment.project(idx));
        }
        let mut in_train: HashSet<Vec<u16>> = HashSet::new();
        for &r in train_rows {
            in_train.insert(table.rows()[r].assignment.project(idx));
        }
        let excluded = seen.len() - in_train.len();
        subspace_exclusion.push(SubspaceExclusionStat {
            factor_indices: idx.to_vec(),
            excluded_fraction: if seen.is_empty() {
                0.0
            } else {
                excluded as f64 / seen.len() as f64
            },
        });
    }

    let (train_fraction, test_fraction) = if n == 0 {
        (0.0, 0.0)
    } else {
        (
            train_rows.len() as f64 / n as f64,
            test_rows.len() as f64 / n as f64,
        )
    };
    SplitStats {
        train_rows: train_rows.len(),
        test_rows: test_rows.len(),
        train_fraction,
        test_fraction,
        coverage,
        subspace_exclusion,
    }
}

/// Recompute [`SplitStats`] for an existing split from its raw id sets.
pub fn split_stats(split: &SplitResult, table: &DatasetTable) -> Result<SplitStats> {
    let (train_rows, test_rows) = split_rows(split, table)?;
    let space = table.space();
    let subspaces: Vec<Subspace> = match (&split.config.pair, split.config.mode) {
        (Some(t), _) => Subspace::new(vec![t.pair.0, t.pair.1], space)
            .map(|s| vec![s])
            .unwrap_or_default(),
        (None, SplitMode::InDistribution) => Vec::new(),
        (None, _) if split.config.intervals.len() == space.num_task_relevant() => {
            crate::orthotopic::enumerate_subspaces(space, split.config.c, &split.config.selection)
                .unwrap_or_default()
        }
        _ => Vec::new(),
    };
    Ok(compute_stats(table, &train_rows, &test_rows, &subspaces))
}

/// Map the split's id sets back to row indices, checking that they form a
/// partition of the table.
fn split_rows(split: &SplitResult, table: &DatasetTable) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(table.len());
    for (i, row) in table.rows().iter().enumerate() {
        index.insert(row.id.as_str(), i);
    }
    let mut seen = vec![false; table.len()];
    let mut lookup = |ids: &[String]| -> Result<Vec<usize>> {
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::InconsistentSplit(format!("unknown id `{id}`")))?;
            if seen[i] {
                return Err(Error::InconsistentSplit(format!("id `{id}` listed twice")));
            }
            seen[i] = true;
            rows.push(i);
        }
        Ok(rows)
    };
    let train_rows = lookup(&split.train_ids)?;
    let test_rows = lookup(&split.test_ids)?;
    if train_rows.len() + test_rows.len() != table.len() {
        return Err(Error::InconsistentSplit(format!(
            "split covers {} of {} rows",
            train_rows.len() + test_rows.len(),
            table.len()
        )));
    }
    Ok((train_rows, test_rows))
}

/// Training-run accounting for the evaluation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCount {
    pub i: usize,
    pub c: usize,
    /// Orthotopic evaluation: a single training run regardless of I.
    pub orthotopic: u64,
    /// Pair-wise evaluation: one run per unordered factor pair.
    pub pairwise: u64,
    /// One run per c-dimensional subspace.
    pub per_subspace: u64,
}

pub fn run_count(i: usize, c: usize) -> Result<RunCount> {
    if c > i {
        return Err(Error::InvalidC { c, i });
    }
    Ok(RunCount {
        i,
        c,
        orthotopic: 1,
        pairwise: binomial(i, 2),
        per_subspace: binomial(i, c),
    })
}

/// Fraction of rows whose task-relevant predictions all match the labels.
pub fn exact_match(predictions: &[Vec<u16>], labels: &[Vec<u16>]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("exact_match needs at least one row"));
    }
    let mut hits = 0usize;
    for (p, l) in predictions.iter().zip(labels) {
        if p.len() != l.len() {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: l.len(),
            });
        }
        if p == l {
            hits += 1;
        }
    }
    Ok(hits as f64 / predictions.len() as f64)
}

/// Per-attribute accuracies over the same rows as [`exact_match`].
pub fn attribute_accuracies(predictions: &[Vec<u16>], labels: &[Vec<u16>]) -> Result<Vec<f64>> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput(
            "attribute_accuracies needs at least one row",
        ));
    }
    let arity = labels[0].len();
    let mut hits = vec![0usize; arity];
    for (p, l) in predictions.iter().zip(labels) {
        if p.len() != arity || l.len() != arity {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: l.len(),
            });
        }
        for (a, (pv, lv)) in p.iter().zip(l).enumerate() {
            if pv == lv {
                hits[a] += 1;
            }
        }
    }
    Ok(hits
        .into_iter()
        .map(|h| h as f64 / predictions.len() as f64)
        .collect())
}

/// Weighted in/out-of-distribution validation score:
/// `val_id + (val_ood - 100) / lambda` (percent scale).
pub fn wio(val_id: f64, val_ood: f64, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 || lambda.is_nan() {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(val_id + (val_ood - 100.0) / lambda)
}
