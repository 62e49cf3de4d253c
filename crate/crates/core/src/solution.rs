//! Filter solutions and independent re-scoring.
//!
//! Every solver returns a [`FilterSolution`]; `score` recomputes all of its
//! metrics from scratch over the input address sets, so reported numbers can
//! always be cross-checked against the filter list alone.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::prefix::Prefix;
use crate::traffic::WeightedAddressSet;
use crate::Result;

/// Which objective the solution was optimized for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Minimize collateral damage while covering every bad address.
    BlockAll,
    /// Minimize collateral damage minus blocked bad weight.
    BlockSome,
    /// Minimize collateral damage subject to a residual-traffic capacity.
    Flooding,
}

/// A set of non-overlapping filter prefixes plus its metrics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSolution {
    /// Chosen prefixes, sorted, pairwise non-overlapping.
    pub filters: Vec<Prefix>,
    /// Total good weight blocked (CD).
    pub collateral_damage: u64,
    /// Total bad weight blocked.
    pub blocked_bad: u64,
    /// Number of bad addresses left uncovered (UBIP).
    pub unblocked_bad_count: u64,
    /// Objective value under the solution's kind.
    pub objective: i64,
    pub filters_used: usize,
}

impl FilterSolution {
    /// The no-filter solution: zero damage, nothing blocked.
    pub fn empty(bad: &WeightedAddressSet) -> Self {
        FilterSolution {
            filters: Vec::new(),
            collateral_damage: 0,
            blocked_bad: 0,
            unblocked_bad_count: bad.len() as u64,
            objective: 0,
            filters_used: 0,
        }
    }

    /// Unblocked traffic left after filtering, given the sets the solution
    /// was computed over.
    pub fn residual_traffic(&self, good: &WeightedAddressSet, bad: &WeightedAddressSet) -> u64 {
        good.total_weight() + bad.total_weight() - self.collateral_damage - self.blocked_bad
    }
}

/// Check that no filter covers another. Prefixes are dyadic intervals, so
/// overlap implies containment; a sorted sweep finds any violation.
pub fn check_non_overlapping(filters: &[Prefix]) -> Result<()> {
    let mut sorted = filters.to_vec();
    sorted.sort_by_key(|p| (p.low(), p.len()));
    let mut covered_until: Option<(u32, Prefix)> = None;
    for p in sorted {
        if let Some((hi, prev)) = covered_until {
            if p.low() <= hi {
                return Err(Error::Scenario(format!("overlapping filters: {prev} and {p}")));
            }
        }
        covered_until = Some((p.high(), p));
    }
    Ok(())
}

/// Recompute every metric of a filter set from scratch. Fails if filters
/// overlap or their widths disagree with the sets.
pub fn score(
    kind: ObjectiveKind,
    filters: &[Prefix],
    good: &WeightedAddressSet,
    bad: &WeightedAddressSet,
) -> Result<FilterSolution> {
    check_non_overlapping(filters)?;
    for p in filters {
        if p.width() != bad.width() {
            return Err(Error::WidthMismatch { expected: bad.width(), got: p.width() });
        }
    }
    let mut cd = 0u64;
    let mut blocked_bad = 0u64;
    let mut covered_bad = 0u64;
    for p in filters {
        for (v, w) in good.iter() {
            if p.contains_value(v) {
                cd += w;
            }
        }
        for (v, w) in bad.iter() {
            if p.contains_value(v) {
                blocked_bad += w;
                covered_bad += 1;
            }
        }
    }
    let mut filters: Vec<Prefix> = filters.to_vec();
    filters.sort();
    let objective = match kind {
        ObjectiveKind::BlockAll | ObjectiveKind::Flooding => cd as i64,
        ObjectiveKind::BlockSome => cd as i64 - blocked_bad as i64,
    };
    Ok(FilterSolution {
        filters_used: filters.len(),
        filters,
        collateral_damage: cd,
        blocked_bad,
        unblocked_bad_count: bad.len() as u64 - covered_bad,
        objective,
    })
}

/// True iff every bad address is covered by some filter.
pub fn covers_all(filters: &[Prefix], bad: &WeightedAddressSet) -> bool {
    bad.addresses().all(|v| filters.iter().any(|p| p.contains_value(v)))
}
