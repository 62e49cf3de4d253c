//! Independent optima for verification, plus the K-means baseline.
//!
//! The brute-force enumerators walk every set of at most `f_max` pairwise
//! non-overlapping prefixes drawn from the *full* prefix universe of the
//! address space (all 2^(W+1)-1 prefixes), deliberately not restricted to
//! LCP-tree nodes, so they independently validate the solvers' structural
//! assumptions. They refuse instances whose enumeration count exceeds the
//! budget rather than truncating silently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::prefix::{lcp_values, Prefix};
use crate::solution::{score, FilterSolution, ObjectiveKind};
use crate::traffic::WeightedAddressSet;
use crate::Result;

/// Hard caps on what the enumerators will attempt.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    pub max_width: u8,
    pub max_f: usize,
    pub max_routers: usize,
    /// Upper bound on the number of candidate sets that may be visited.
    pub work_limit: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_width: 8, max_f: 5, max_routers: 2, work_limit: 200_000_000 }
    }
}

/// Number of candidate sets (all subsets of size <= f of the prefix
/// universe, ignoring the overlap restriction): an upper bound on the work.
pub fn estimate_sets(width: u8, f_max: usize) -> u128 {
    let universe = (1u128 << (width + 1)) - 1;
    let mut total = 1u128; // the empty set
    let mut term = 1u128; // C(universe, k)
    for k in 1..=f_max as u128 {
        term = term.saturating_mul(universe + 1 - k) / k;
        total = total.saturating_add(term);
    }
    total
}

fn ensure_budget(width: u8, f_max: usize, budget: &EnumerationBudget) -> Result<u128> {
    if width > budget.max_width || f_max > budget.max_f {
        return Err(Error::BudgetExceeded {
            estimated: estimate_sets(width, f_max),
            limit: budget.work_limit,
        });
    }
    let estimated = estimate_sets(width, f_max);
    if estimated > budget.work_limit {
        return Err(Error::BudgetExceeded { estimated, limit: budget.work_limit });
    }
    Ok(estimated)
}

/// One candidate prefix with everything the enumerators need precomputed.
#[derive(Clone, Debug)]
struct Candidate {
    prefix: Prefix,
    good: u64,
    bad: u64,
    /// Bitmask over the (sorted) blacklist addresses this prefix covers.
    bad_mask: u64,
}

fn universe(width: u8, good: &WeightedAddressSet, bad: &WeightedAddressSet) -> Vec<Candidate> {
    universe_masked(width, good, bad, &bad.addresses().collect::<Vec<_>>())
}

/// `mask_addrs` defines which addresses the coverage bitmask tracks; for
/// multi-router scenarios that is the global blacklist.
fn universe_masked(
    width: u8,
    good: &WeightedAddressSet,
    bad: &WeightedAddressSet,
    mask_addrs: &[u32],
) -> Vec<Candidate> {
    assert!(mask_addrs.len() <= 64, "coverage mask is limited to 64 addresses");
    let mut out = Vec::with_capacity(((2u64 << width) - 1) as usize);
    for len in 0..=width {
        for slot in 0..(1u64 << len) {
            let base = if len == 0 { 0 } else { (slot as u32) << (width - len) };
            let prefix = Prefix::new(base, len, width).expect("aligned");
            let (lo, hi) = (prefix.low(), prefix.high());
            let g: u64 = good.iter().filter(|&(v, _)| v >= lo && v <= hi).map(|(_, w)| w).sum();
            let b: u64 = bad.iter().filter(|&(v, _)| v >= lo && v <= hi).map(|(_, w)| w).sum();
            let mut bad_mask = 0u64;
            for (i, &v) in mask_addrs.iter().enumerate() {
                if v >= lo && v <= hi {
                    bad_mask |= 1 << i;
                }
            }
            out.push(Candidate { prefix, good: g, bad: b, bad_mask });
        }
    }
    // A prefix carrying no weight and covering no tracked address is inert
    // in every objective, constraint, and coverage check: any candidate set
    // containing it scores identically without it. Dropping them keeps the
    // enumeration exhaustive over distinct outcomes.
    out.retain(|c| c.good > 0 || c.bad > 0 || c.bad_mask != 0);
    // Sorted by (low, len), prefixes are dyadic intervals: a set of
    // strictly-increasing indices is non-overlapping exactly when each next
    // low clears the previous high, which the enumerator exploits.
    out.sort_by_key(|c| (c.prefix.low(), c.prefix.len()));
    out
}

/// Enumerate every non-overlapping subset of `candidates` with at most
/// `f_max` members, calling `visit` with (chosen indices, cd, bad, mask).
fn enumerate_sets(
    candidates: &[Candidate],
    f_max: usize,
    visit: &mut impl FnMut(&[usize], u64, u64, u64),
) {
    let lows: Vec<u32> = candidates.iter().map(|c| c.prefix.low()).collect();
    // First index whose interval starts past candidate i's end.
    let next: Vec<usize> = candidates
        .iter()
        .map(|c| lows.partition_point(|&lo| lo <= c.prefix.high()))
        .collect();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        candidates: &[Candidate],
        next: &[usize],
        start: usize,
        budget: usize,
        chosen: &mut Vec<usize>,
        cd: u64,
        bad: u64,
        mask: u64,
        visit: &mut impl FnMut(&[usize], u64, u64, u64),
    ) {
        visit(chosen, cd, bad, mask);
        if budget == 0 {
            return;
        }
        // Every candidate from `start` on is compatible with the chosen set.
        for i in start..candidates.len() {
            let c = &candidates[i];
            chosen.push(i);
            rec(candidates, next, next[i], budget - 1, chosen, cd + c.good, bad + c.bad, mask | c.bad_mask, visit);
            chosen.pop();
        }
    }
    let mut chosen = Vec::with_capacity(f_max);
    rec(candidates, &next, 0, f_max, &mut chosen, 0, 0, 0, visit);
}

/// Exhaustive optimum for the cover-everything problem. Errors if no
/// feasible cover exists within `f_max`.
pub fn brute_force_block_all(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    budget: &EnumerationBudget,
) -> Result<FilterSolution> {
    let width = bad.width();
    ensure_budget(width, f_max, budget)?;
    if bad.is_empty() {
        return Ok(FilterSolution::empty(bad));
    }
    let candidates = universe(width, good, bad);
    let full: u64 = if bad.len() == 64 { u64::MAX } else { (1 << bad.len()) - 1 };
    let mut best: Option<(u64, Vec<usize>)> = None;
    enumerate_sets(&candidates, f_max, &mut |chosen, cd, _bad, mask| {
        if mask == full && best.as_ref().is_none_or(|(b, _)| cd < *b) {
            best = Some((cd, chosen.to_vec()));
        }
    });
    let (_, chosen) = best.ok_or_else(|| {
        Error::infeasible(format!("no {f_max}-filter cover of {} addresses", bad.len()), None)
    })?;
    let filters: Vec<Prefix> = chosen.iter().map(|&i| candidates[i].prefix).collect();
    score(ObjectiveKind::BlockAll, &filters, good, bad)
}

/// Exhaustive optimum for the block-what-is-worth-it problem.
pub fn brute_force_block_some(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    budget: &EnumerationBudget,
) -> Result<FilterSolution> {
    let width = bad.width();
    ensure_budget(width, f_max, budget)?;
    let candidates = universe(width, good, bad);
    let mut best: (i64, Vec<usize>) = (0, Vec::new());
    enumerate_sets(&candidates, f_max, &mut |chosen, cd, bad_w, _mask| {
        let objective = cd as i64 - bad_w as i64;
        if objective < best.0 {
            best = (objective, chosen.to_vec());
        }
    });
    let filters: Vec<Prefix> = best.1.iter().map(|&i| candidates[i].prefix).collect();
    score(ObjectiveKind::BlockSome, &filters, good, bad)
}

/// Exhaustive optimum for the capacity-constrained problem. An infeasible
/// instance is reported together with the maximum blockable traffic.
pub fn brute_force_flooding(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    capacity: u64,
    budget: &EnumerationBudget,
) -> Result<FilterSolution> {
    let width = bad.width();
    ensure_budget(width, f_max, budget)?;
    let total = good.total_weight() + bad.total_weight();
    let candidates = universe(width, good, bad);
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut max_blockable = 0u64;
    enumerate_sets(&candidates, f_max, &mut |chosen, cd, bad_w, _mask| {
        let blocked = cd + bad_w;
        max_blockable = max_blockable.max(blocked);
        if total - blocked <= capacity && best.as_ref().is_none_or(|(b, _)| cd < *b) {
            best = Some((cd, chosen.to_vec()));
        }
    });
    let (_, chosen) = best.ok_or_else(|| {
        Error::infeasible(
            format!("cannot block {} traffic units with {f_max} filters", total.saturating_sub(capacity)),
            Some(max_blockable),
        )
    })?;
    let filters: Vec<Prefix> = chosen.iter().map(|&i| candidates[i].prefix).collect();
    score(ObjectiveKind::Flooding, &filters, good, bad)
}

/// One router of a joint enumeration instance.
#[derive(Clone, Debug)]
pub struct OracleRouter {
    pub good: WeightedAddressSet,
    pub bad: WeightedAddressSet,
    pub f_max: usize,
    pub capacity: u64,
}

/// Joint optimum over two routers: each router's set must satisfy its own
/// budget and capacity, and no global blacklist address may be covered at
/// both routers.
pub fn brute_force_joint_flooding(
    routers: &[OracleRouter],
    global_bad: &[u32],
    budget: &EnumerationBudget,
) -> Result<(u64, Vec<Vec<Prefix>>)> {
    if routers.len() > budget.max_routers {
        return Err(Error::BudgetExceeded { estimated: u128::MAX, limit: budget.work_limit });
    }
    if routers.len() == 1 {
        let r = &routers[0];
        let sol = brute_force_flooding(&r.bad, &r.good, r.f_max, r.capacity, budget)?;
        return Ok((sol.collateral_damage, vec![sol.filters]));
    }
    assert_eq!(routers.len(), 2, "joint enumeration supports one or two routers");
    if global_bad.len() > 16 {
        return Err(Error::BudgetExceeded { estimated: u128::MAX, limit: budget.work_limit });
    }
    let width = routers[0].bad.width();
    for r in routers {
        ensure_budget(width, r.f_max, budget)?;
    }

    // Router 2: cheapest capacity-feasible set for every exact coverage
    // mask, then a subset-minimum sweep so lookups by "allowed mask" are
    // O(1).
    let r2 = &routers[1];
    let cand2 = universe_masked(width, &r2.good, &r2.bad, global_bad);
    let total2 = r2.good.total_weight() + r2.bad.total_weight();
    let n_masks = 1usize << global_bad.len();
    let mut best2: Vec<Option<(u64, Vec<usize>)>> = vec![None; n_masks];
    enumerate_sets(&cand2, r2.f_max, &mut |chosen, cd, bad_w, mask| {
        if total2 - (cd + bad_w) <= r2.capacity {
            let slot = &mut best2[mask as usize];
            if slot.as_ref().is_none_or(|(b, _)| cd < *b) {
                *slot = Some((cd, chosen.to_vec()));
            }
        }
    });
    for bit in 0..global_bad.len() {
        for m in 0..n_masks {
            if m & (1 << bit) != 0 {
                if let Some((c_lo, set_lo)) = best2[m ^ (1 << bit)].clone() {
                    let slot = &mut best2[m];
                    if slot.as_ref().is_none_or(|(c, _)| c_lo < *c) {
                        *slot = Some((c_lo, set_lo));
                    }
                }
            }
        }
    }

    let r1 = &routers[0];
    let cand1 = universe_masked(width, &r1.good, &r1.bad, global_bad);
    let total1 = r1.good.total_weight() + r1.bad.total_weight();
    let full = n_masks - 1;
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    enumerate_sets(&cand1, r1.f_max, &mut |chosen, cd, bad_w, mask| {
        if total1 - (cd + bad_w) > r1.capacity {
            return;
        }
        let allowed = full & !(mask as usize);
        if let Some((cd2, set2)) = &best2[allowed] {
            let total_cd = cd + cd2;
            if best.as_ref().is_none_or(|(b, _, _)| total_cd < *b) {
                best = Some((total_cd, chosen.to_vec(), set2.clone()));
            }
        }
    });
    let (total_cd, set1, set2) = best.ok_or_else(|| {
        Error::infeasible("no jointly feasible assignment", None)
    })?;
    Ok((
        total_cd,
        vec![
            set1.iter().map(|&i| cand1[i].prefix).collect(),
            set2.iter().map(|&i| cand2[i].prefix).collect(),
        ],
    ))
}

/// Lloyd's K-means on addresses as scalar integers, lifted to filters by
/// covering each cluster with the LCP of its members and merging any
/// covering prefix contained in another. Best of `restarts` seeded runs.
pub fn kmeans_filters(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    restarts: usize,
    seed: u64,
    exec: Exec,
) -> Result<FilterSolution> {
    if f_max < 1 || restarts < 1 {
        return Err(Error::Scenario("k-means needs f_max >= 1 and restarts >= 1".into()));
    }
    if bad.is_empty() {
        return Ok(FilterSolution::empty(bad));
    }
    let points: Vec<u32> = bad.addresses().collect(); // already sorted
    let width = bad.width();

    if f_max >= points.len() {
        let filters: Vec<Prefix> =
            points.iter().map(|&v| Prefix::new(v, width, width).expect("host")).collect();
        return score(ObjectiveKind::BlockAll, &filters, good, bad);
    }

    let runs = exec::map_indexed(exec, restarts, |restart| {
        let restart_seed =
            seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
        let filters = lloyd_run(&points, f_max, width, &mut rng);
        let cd: u64 = good
            .iter()
            .filter(|&(v, _)| filters.iter().any(|p| p.contains_value(v)))
            .map(|(_, w)| w)
            .sum();
        (cd, filters)
    });
    let (_, filters) = runs
        .into_iter()
        .min_by_key(|(cd, _)| *cd)
        .expect("restarts >= 1");
    score(ObjectiveKind::BlockAll, &filters, good, bad)
}

fn lloyd_run(points: &[u32], k: usize, width: u8, rng: &mut ChaCha8Rng) -> Vec<Prefix> {
    // Initial centroids: k distinct points, sorted.
    let mut picked = std::collections::HashSet::with_capacity(k);
    while picked.len() < k {
        picked.insert(points[rng.gen_range(0..points.len())]);
    }
    let mut centroids: Vec<f64> = picked.iter().map(|&v| v as f64).collect();
    centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut bounds = vec![0usize; k + 1];
    for _ in 0..300 {
        // Cluster i holds points in (mid[i-1], mid[i]]; points exactly on a
        // midpoint go to the lower-index cluster.
        bounds[0] = 0;
        bounds[k] = points.len();
        for i in 1..k {
            let mid = (centroids[i - 1] + centroids[i]) / 2.0;
            bounds[i] = points.partition_point(|&p| (p as f64) <= mid);
        }
        let mut next = centroids.clone();
        for i in 0..k {
            let slice = &points[bounds[i]..bounds[i + 1]];
            if !slice.is_empty() {
                let sum: f64 = slice.iter().map(|&p| p as f64).sum();
                next[i] = sum / slice.len() as f64;
            }
        }
        if next == centroids {
            break;
        }
        centroids = next;
    }

    // Lift clusters to covering prefixes, dropping any prefix covered by
    // another.
    let mut prefixes: Vec<Prefix> = Vec::new();
    for i in 0..k {
        let slice = &points[bounds[i]..bounds[i + 1]];
        if slice.is_empty() {
            continue;
        }
        prefixes.push(lcp_values(slice[0], *slice.last().unwrap(), width));
    }
    prefixes.sort_by_key(|p| (p.low(), p.len()));
    prefixes.dedup();
    let mut merged: Vec<Prefix> = Vec::with_capacity(prefixes.len());
    for p in prefixes {
        match merged.last() {
            Some(last) if last.covers(&p) => {}
            _ => merged.push(p),
        }
    }
    merged
}
