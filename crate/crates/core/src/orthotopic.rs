//! Orthotopic split generation: iterative orthotope pruning over every
//! (c+1)-dimensional task-relevant subspace, with configurable exclusion
//! size, orthotope count, and position, plus threshold calibration and the
//! in-distribution id holdout.
//!
//! A sample lands in the test split iff some selected subspace has all of
//! its coordinates inside the per-factor exclusion intervals. This direct
//! per-sample predicate is equivalent to the iterative project-and-prune
//! formulation (set difference commutes with union over subspaces); the
//! equivalence is covered by tests.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, k_subsets};
use crate::dataset::{group_by_task_relevant, DatasetTable};
use crate::error::{Error, Result};
use crate::factor::FactorSpace;
use crate::pairwise::PairThresholds;
use crate::verify::{compute_stats, SplitStats};

/// Test fraction used when a split request degenerates to the
/// in-distribution case (c = I).
pub const DEFAULT_IN_DISTRIBUTION_FRACTION: f64 = 0.1;

/// A (c+1)-subset of task-relevant factor indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subspace {
    factor_indices: Vec<usize>,
}

impl Subspace {
    pub fn new(mut factor_indices: Vec<usize>, space: &FactorSpace) -> Result<Self> {
        factor_indices.sort_unstable();
        factor_indices.dedup();
        for &f in &factor_indices {
            if f >= space.len() || !space.factor(f).task_relevant {
                return Err(Error::IntervalOnIrrelevantFactor(f));
            }
        }
        Ok(Self { factor_indices })
    }

    pub fn factor_indices(&self) -> &[usize] {
        &self.factor_indices
    }
}

/// How many of the candidate subspaces take part in the pruning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubspaceSelection {
    /// Every (c+1)-subset; the strict evaluation.
    All,
    /// Lexicographic prefix of length n.
    FirstN { n: usize },
    /// Seeded uniform sample of n subsets without replacement, then sorted.
    RandomN { n: usize, seed: u64 },
}

/// A contiguous excluded value range `[start, start + length)` on one factor.
///
/// At least one value of the factor always stays observable in training
/// (`length <= cardinality - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionInterval {
    pub factor_index: usize,
    pub start: usize,
    pub length: usize,
}

impl ExclusionInterval {
    pub fn new(
        factor_index: usize,
        start: usize,
        length: usize,
        space: &FactorSpace,
    ) -> Result<Self> {
        if factor_index >= space.len() {
            return Err(Error::IntervalOnIrrelevantFactor(factor_index));
        }
        let spec = space.factor(factor_index);
        if !spec.task_relevant {
            return Err(Error::IntervalOnIrrelevantFactor(factor_index));
        }
        let cardinality = spec.cardinality;
        if length == 0 || length > cardinality - 1 || start + length > cardinality {
            return Err(Error::InvalidInterval {
                factor_index,
                start,
                length,
                cardinality,
            });
        }
        Ok(Self {
            factor_index,
            start,
            length,
        })
    }

    pub fn contains(&self, value: u16) -> bool {
        let v = value as usize;
        v >= self.start && v < self.start + self.length
    }

    /// Re-check an interval that came from untrusted input (e.g. JSON).
    pub fn validate(&self, space: &FactorSpace) -> Result<()> {
        Self::new(self.factor_index, self.start, self.length, space).map(|_| ())
    }
}

/// Exclusion region specification, one interval per task-relevant factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExclusionSpec {
    /// Intervals given verbatim.
    Explicit { intervals: Vec<ExclusionInterval> },
    /// Per-factor length `1 + round(v * (cardinality - 2))`, anchored at the
    /// top of the range unless `position_offsets` (one start per
    /// task-relevant factor, in canonical order) says otherwise.
    Fractional {
        v: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        position_offsets: Option<Vec<usize>>,
    },
}

impl ExclusionSpec {
    pub fn corner(v: f64) -> Self {
        ExclusionSpec::Fractional {
            v,
            position_offsets: None,
        }
    }
}

/// Instantiate `spec` on `space`: one interval per task-relevant factor,
/// sorted by factor index.
pub fn resolve_exclusion(
    space: &FactorSpace,
    spec: &ExclusionSpec,
) -> Result<Vec<ExclusionInterval>> {
    match spec {
        ExclusionSpec::Explicit { intervals } => {
            let mut covered: Vec<usize> = Vec::with_capacity(intervals.len());
            for iv in intervals {
                iv.validate(space)?;
                covered.push(iv.factor_index);
            }
            covered.sort_unstable();
            if covered != space.task_relevant_indices() {
                return Err(Error::IncompleteExclusionSpec);
            }
            let mut sorted = intervals.clone();
            sorted.sort_by_key(|iv| iv.factor_index);
            Ok(sorted)
        }
        ExclusionSpec::Fractional {
            v,
            position_offsets,
        } => {
            if !(0.0..=1.0).contains(v) || !v.is_finite() {
                return Err(Error::InvalidExclusionSize(*v));
            }
            let tr = space.task_relevant_indices();
            if let Some(offsets) = position_offsets {
                if offsets.len() != tr.len() {
                    return Err(Error::IncompleteExclusionSpec);
                }
            }
            tr.iter()
                .enumerate()
                .map(|(pos, &f)| {
                    let n = space.factor(f).cardinality;
                    let length = 1 + (v * (n as f64 - 2.0)).round() as usize;
                    let start = match position_offsets {
                        Some(offsets) => offsets[pos],
                        None => n - length,
                    };
                    ExclusionInterval::new(f, start, length, space)
                })
                .collect()
        }
    }
}

/// The candidate (c+1)-dimensional subspaces, filtered by `selection`.
pub fn enumerate_subspaces(
    space: &FactorSpace,
    c: usize,
    selection: &SubspaceSelection,
) -> Result<Vec<Subspace>> {
    let i_count = space.num_task_relevant();
    if c + 1 > i_count {
        return Err(Error::InvalidC { c, i: i_count });
    }
    let all: Vec<Vec<usize>> = k_subsets(space.task_relevant_indices(), c + 1);
    let total = all.len();
    let pick = |subsets: Vec<Vec<usize>>| {
        subsets
            .into_iter()
            .map(|factor_indices| Subspace { factor_indices })
            .collect::<Vec<_>>()
    };
    match selection {
        SubspaceSelection::All => Ok(pick(all)),
        SubspaceSelection::FirstN { n } => {
            if *n < 1 || *n > total {
                return Err(Error::SubspaceCountOutOfRange {
                    n: *n,
                    max: binomial(i_count, c + 1),
                });
            }
            Ok(pick(all.into_iter().take(*n).collect()))
        }
        SubspaceSelection::RandomN { n, seed } => {
            if *n < 1 || *n > total {
                return Err(Error::SubspaceCountOutOfRange {
                    n: *n,
                    max: binomial(i_count, c + 1),
                });
            }
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            let mut indices: Vec<usize> = (0..total).collect();
            indices.shuffle(&mut rng);
            let mut chosen: Vec<Vec<usize>> =
                indices[..*n].iter().map(|&i| all[i].clone()).collect();
            chosen.sort();
            Ok(pick(chosen))
        }
    }
}

/// Which regime produced a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Compositional,
    Pairwise,
    InDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutConfig {
    pub test_fraction: f64,
    /// False when replica counts forced a plain uniform draw.
    pub stratified: bool,
}

/// Full provenance of a split; embedded in every split output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub c: usize,
    pub intervals: Vec<ExclusionInterval>,
    pub selection: SubspaceSelection,
    pub seed: u64,
    pub mode: SplitMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<PairThresholds>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub holdout: Option<HoldoutConfig>,
}

/// Train/test id sets plus provenance and recomputed statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub config: SplitConfig,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub stats: SplitStats,
}

impl SplitResult {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("split serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub(crate) fn build_split_result(
    table: &DatasetTable,
    config: SplitConfig,
    subspaces: &[Subspace],
    is_test: impl Fn(&crate::factor::Assignment) -> bool,
) -> Result<SplitResult> {
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (i, row) in table.rows().iter().enumerate() {
        if is_test(&row.assignment) {
            test_rows.push(i);
        } else {
            train_rows.push(i);
        }
    }
    if train_rows.is_empty() && !table.is_empty() {
        return Err(Error::EmptyTrain);
    }
    finish_split(table, config, subspaces, train_rows, test_rows)
}

pub(crate) fn finish_split(
    table: &DatasetTable,
    config: SplitConfig,
    subspaces: &[Subspace],
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
) -> Result<SplitResult> {
    let stats = compute_stats(table, &train_rows, &test_rows, subspaces);
    let mut train_ids: Vec<String> = train_rows
        .iter()
        .map(|&i| table.rows()[i].id.clone())
        .collect();
    let mut test_ids: Vec<String> = test_rows
        .iter()
        .map(|&i| table.rows()[i].id.clone())
        .collect();
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(SplitResult {
        config,
        train_ids,
        test_ids,
        stats,
    })
}

/// Generate a compositional split at similarity index `c`.
///
/// For c = I (in-distribution) the exclusion machinery is a no-op and the
/// call delegates to [`id_holdout_split`] with
/// [`DEFAULT_IN_DISTRIBUTION_FRACTION`] and seed 0.
pub fn orthotopic_split(
    table: &DatasetTable,
    c: usize,
    spec: &ExclusionSpec,
    selection: &SubspaceSelection,
) -> Result<SplitResult> {
    let space = table.space();
    let i_count = space.num_task_relevant();
    if c > i_count {
        return Err(Error::InvalidC { c, i: i_count });
    }
    if c == i_count {
        return id_holdout_split(table, DEFAULT_IN_DISTRIBUTION_FRACTION, 0);
    }
    let intervals = resolve_exclusion(space, spec)?;
    let subspaces = enumerate_subspaces(space, c, selection)?;
    let mut interval_of: Vec<Option<ExclusionInterval>> = vec![None; space.len()];
    for iv in &intervals {
        interval_of[iv.factor_index] = Some(*iv);
    }
    let seed = match selection {
        SubspaceSelection::RandomN { seed, .. } => *seed,
        _ => 0,
    };
    let config = SplitConfig {
        c,
        intervals: intervals.clone(),
        selection: selection.clone(),
        seed,
        mode: SplitMode::Compositional,
        pair: None,
        holdout: None,
    };
    build_split_result(table, config, &subspaces, |assignment| {
        subspaces.iter().any(|s| {
            s.factor_indices().iter().all(|&f| {
                interval_of[f]
                    .as_ref()
                    .is_some_and(|iv| iv.contains(assignment.value(f)))
            })
        })
    })
}

/// In-distribution split: a seeded uniform id holdout, stratified by
/// task-relevant assignment when every assignment has at least two replicas.
pub fn id_holdout_split(
    table: &DatasetTable,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitResult> {
    if table.len() < 2 {
        return Err(Error::TooFewSamples(table.len()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let n = table.len();
    let n_test = ((test_fraction * n as f64).floor() as usize).max(1);
    let groups: BTreeMap<Vec<u16>, Vec<usize>> = group_by_task_relevant(table);
    let spare: usize = groups.values().map(|g| g.len() - 1).sum();
    let stratified = groups.values().all(|g| g.len() >= 2) && n_test <= spare;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let test_rows: Vec<usize> = if stratified {
        // Each assignment pins one (random) replica to train; the test draw
        // is uniform over the remaining candidates.
        let mut candidates = Vec::with_capacity(spare);
        for rows in groups.values() {
            let mut rows = rows.clone();
            rows.shuffle(&mut rng);
            candidates.extend_from_slice(&rows[1..]);
        }
        candidates.shuffle(&mut rng);
        candidates.truncate(n_test);
        candidates
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        rows.truncate(n_test);
        rows
    };
    let mut in_test = vec![false; n];
    for &r in &test_rows {
        in_test[r] = true;
    }
    let train_rows: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
    let test_rows: Vec<usize> = (0..n).filter(|&r| in_test[r]).collect();

    let config = SplitConfig {
        c: table.space().num_task_relevant(),
        intervals: Vec::new(),
        selection: SubspaceSelection::All,
        seed,
        mode: SplitMode::InDistribution,
        pair: None,
        holdout: Some(HoldoutConfig {
            test_fraction,
            stratified,
        }),
    };
    finish_split(table, config, &[], train_rows, test_rows)
}

/// One evaluated calibration candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCandidate {
    pub v: f64,
    pub lengths: Vec<usize>,
    pub train_fraction: f64,
}

/// Outcome of [`calibrate_thresholds`]: the winning spec plus the achieved
/// fraction; calibration never fails just because the target is out of
/// reach, it flags the miss instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub spec: ExclusionSpec,
    pub intervals: Vec<ExclusionInterval>,
    pub target_train_fraction: f64,
    pub achieved_train_fraction: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub candidates: Vec<CalibrationCandidate>,
}

/// Pick the fractional exclusion size whose achieved train fraction is
/// closest to `target_train_fraction`.
///
/// The train fraction is monotone non-increasing in v and piecewise
/// constant, so the finite set of plateaus is enumerated exactly; ties go
/// to the smaller v.
pub fn calibrate_thresholds(
    table: &DatasetTable,
    c: usize,
    target_train_fraction: f64,
    tolerance: f64,
) -> Result<CalibrationOutcome> {
    let space = table.space();
    let i_count = space.num_task_relevant();
    if c >= i_count {
        return Err(Error::InvalidC { c, i: i_count });
    }
    if !(target_train_fraction > 0.0 && target_train_fraction < 1.0) {
        return Err(Error::InvalidFraction(target_train_fraction));
    }

    // Plateau breakpoints of v -> interval lengths.
    let mut breaks: Vec<f64> = Vec::new();
    for &f in space.task_relevant_indices() {
        let n = space.factor(f).cardinality;
        for j in 0..n.saturating_sub(2) {
            breaks.push((j as f64 + 0.5) / (n as f64 - 2.0));
        }
    }
    breaks.retain(|b| *b > 0.0 && *b < 1.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();

    let mut candidates: Vec<f64> = Vec::with_capacity(breaks.len() + 1);
    candidates.push(0.0);
    for w in breaks.windows(2) {
        candidates.push((w[0] + w[1]) / 2.0);
    }
    if !breaks.is_empty() {
        candidates.push(1.0);
    }
    if candidates.len() < 2 {
        return Err(Error::DegenerateCalibration);
    }

    let selection = SubspaceSelection::All;
    let mut evaluated = Vec::with_capacity(candidates.len());
    for &v in &candidates {
        let spec = ExclusionSpec::corner(v);
        let split = orthotopic_split(table, c, &spec, &selection)?;
        evaluated.push(CalibrationCandidate {
            v,
            lengths: split.config.intervals.iter().map(|iv| iv.length).collect(),
            train_fraction: split.stats.train_fraction,
        });
    }
    let best = evaluated
        .iter()
        .min_by(|a, b| {
            let da = (a.train_fraction - target_train_fraction).abs();
            let db = (b.train_fraction - target_train_fraction).abs();
            da.partial_cmp(&db)
                .unwrap()
                .then(a.v.partial_cmp(&b.v).unwrap())
        })
        .expect("candidate list is non-empty")
        .clone();

    let spec = ExclusionSpec::corner(best.v);
    let intervals = resolve_exclusion(space, &spec)?;
    let within = (best.train_fraction - target_train_fraction).abs() <= tolerance;
    Ok(CalibrationOutcome {
        spec,
        intervals,
        target_train_fraction,
        achieved_train_fraction: best.train_fraction,
        tolerance,
        within_tolerance: within,
        candidates: evaluated,
    })
}
