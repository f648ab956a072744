//! Pair-wise compositional splits: one excluded corner per factor pair,
//! with an exhaustive regularized threshold search that balances exclusion
//! sizes across the two attributes.
//!
//! The 2-D candidate space is at most (n-1)^2 points, so the "solver" is an
//! exact enumeration of all feasible (k_a, k_b) excluded-count pairs.

use serde::{Deserialize, Serialize};

use crate::combinatorics::k_subsets;
use crate::dataset::DatasetTable;
use crate::error::{Error, Result};
use crate::factor::FactorSpace;
use crate::orthotopic::SplitResult;
use crate::orthotopic::{
    build_split_result, ExclusionInterval, SplitConfig, SplitMode, Subspace, SubspaceSelection,
};

/// Solved per-pair exclusion thresholds: the top `k` values of each factor
/// form the excluded corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairThresholds {
    /// Factor indices (a, b), a < b.
    pub pair: (usize, usize),
    /// Values excluded per attribute (k_a, k_b).
    pub excluded: (usize, usize),
    /// k_a * k_b / (n_a * n_b); equals |test| / N on full grids.
    pub achieved_fraction: f64,
}

fn check_pair(space: &FactorSpace, pair: (usize, usize)) -> Result<()> {
    let (a, b) = pair;
    if a == b
        || a >= space.len()
        || b >= space.len()
        || !space.factor(a).task_relevant
        || !space.factor(b).task_relevant
    {
        return Err(Error::InvalidPair(a, b));
    }
    Ok(())
}

/// Exhaustively minimize `|achieved - target| + w * |k_a/n_a - k_b/n_b|`
/// over all feasible excluded counts; ties go to the smaller imbalance,
/// then the smaller k_a.
pub fn solve_pair_thresholds(
    space: &FactorSpace,
    pair: (usize, usize),
    target_fraction: f64,
    balance_weight: f64,
) -> Result<PairThresholds> {
    check_pair(space, pair)?;
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::InvalidFraction(target_fraction));
    }
    if balance_weight < 0.0 || balance_weight.is_nan() {
        return Err(Error::InvalidBalanceWeight(balance_weight));
    }
    let (a, b) = pair;
    let n_a = space.factor(a).cardinality;
    let n_b = space.factor(b).cardinality;
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for k_a in 1..n_a {
        for k_b in 1..n_b {
            let achieved = (k_a * k_b) as f64 / (n_a * n_b) as f64;
            let imbalance = (k_a as f64 / n_a as f64 - k_b as f64 / n_b as f64).abs();
            let cost = (achieved - target_fraction).abs() + balance_weight * imbalance;
            let candidate = (cost, imbalance, k_a, k_b);
            let better = match &best {
                None => true,
                Some((c, i, ka, _)) => (cost, imbalance, k_a) < (*c, *i, *ka),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    let (_, _, k_a, k_b) = best.expect("cardinalities >= 2 give a non-empty search space");
    Ok(PairThresholds {
        pair,
        excluded: (k_a, k_b),
        achieved_fraction: (k_a * k_b) as f64 / (n_a * n_b) as f64,
    })
}

/// Split on one factor pair: test iff both pair coordinates lie in their
/// top-k excluded ranges.
pub fn pairwise_split(
    table: &DatasetTable,
    pair: (usize, usize),
    thresholds: &PairThresholds,
) -> Result<SplitResult> {
    let space = table.space();
    check_pair(space, pair)?;
    if thresholds.pair != pair {
        return Err(Error::InvalidPair(thresholds.pair.0, thresholds.pair.1));
    }
    let (a, b) = pair;
    let (k_a, k_b) = thresholds.excluded;
    let n_a = space.factor(a).cardinality;
    let n_b = space.factor(b).cardinality;
    for (f, k, n) in [(a, k_a, n_a), (b, k_b, n_b)] {
        if k < 1 || k > n - 1 {
            return Err(Error::ExcludedCountOutOfRange {
                factor_index: f,
                count: k,
                max: n - 1,
            });
        }
    }
    let iv_a = ExclusionInterval::new(a, n_a - k_a, k_a, space)?;
    let iv_b = ExclusionInterval::new(b, n_b - k_b, k_b, space)?;
    let subspace = Subspace::new(vec![a, b], space)?;
    let config = SplitConfig {
        c: 1,
        intervals: vec![iv_a, iv_b],
        selection: SubspaceSelection::All,
        seed: 0,
        mode: SplitMode::Pairwise,
        pair: Some(thresholds.clone()),
        holdout: None,
    };
    let subspaces = vec![subspace];
    build_split_result(table, config, &subspaces, |assignment| {
        iv_a.contains(assignment.value(a)) && iv_b.contains(assignment.value(b))
    })
}

/// One split per unordered task-relevant pair, lexicographic pair order,
/// each with its own solved thresholds.
pub fn pairwise_suite(
    table: &DatasetTable,
    target_fraction: f64,
    balance_weight: f64,
) -> Result<Vec<SplitResult>> {
    let space = table.space();
    let i_count = space.num_task_relevant();
    if i_count < 2 {
        return Err(Error::InvalidC { c: 1, i: i_count });
    }
    let pairs = k_subsets(space.task_relevant_indices(), 2);
    pairs
        .into_iter()
        .map(|p| {
            let pair = (p[0], p[1]);
            let thresholds = solve_pair_thresholds(space, pair, target_fraction, balance_weight)?;
            pairwise_split(table, pair, &thresholds)
        })
        .collect()
}
