//! Price-coordinated filtering across several routers under one flooding
//! attack.
//!
//! A coordinator maintains one non-negative price per blacklist address and
//! broadcasts the vector each round; every router independently solves its
//! own capacity-constrained subproblem with filter costs raised by the
//! summed prices of the addresses a prefix covers. Prices rise on addresses
//! filtered at more than one router, steering routers apart. Because the
//! relaxed iterates may still conflict, each round also runs a recovery
//! step that drops duplicated coverage and re-solves the affected routers,
//! yielding a feasible assignment whose gap to the dual bound is reported.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::flooding::{nodes_to_solution, FloodingDp, FloodingInstance};
use crate::prefix::Prefix;
use crate::solution::FilterSolution;
use crate::traffic::WeightedAddressSet;
use crate::tree::{LcpTree, NodeId};
use crate::Result;

/// One router's budget, capacity, and locally observed traffic.
#[derive(Clone, Debug)]
pub struct RouterSpec {
    pub id: String,
    pub f_max: usize,
    pub capacity: u64,
    pub good: WeightedAddressSet,
    pub bad: WeightedAddressSet,
}

impl RouterSpec {
    pub fn total_traffic(&self) -> u64 {
        self.good.total_weight() + self.bad.total_weight()
    }

    /// The router's local problem as a plain flooding instance.
    pub fn instance(&self) -> Result<FloodingInstance> {
        FloodingInstance::new(self.bad.clone(), self.good.clone(), self.f_max, self.capacity)
    }
}

/// Non-negative multipliers over the global blacklist; a prefix's price is
/// the sum over the blacklist addresses it covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceVector {
    addrs: Vec<u32>,
    prices: Vec<f64>,
    cum: Vec<f64>,
}

impl PriceVector {
    pub fn zeros(blacklist: &WeightedAddressSet) -> Self {
        let addrs: Vec<u32> = blacklist.addresses().collect();
        let n = addrs.len();
        PriceVector { addrs, prices: vec![0.0; n], cum: vec![0.0; n + 1] }
    }

    pub fn len(&self) -> usize {
        self.addrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addrs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.addrs.iter().copied().zip(self.prices.iter().copied())
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().expect("cum nonempty")
    }

    /// Price of one prefix: sum of the multipliers of covered addresses.
    pub fn prefix_price(&self, prefix: &Prefix) -> f64 {
        let a = self.addrs.partition_point(|&v| v < prefix.low());
        let b = self.addrs.partition_point(|&v| v <= prefix.high());
        self.cum[b] - self.cum[a]
    }

    /// Projected update: `prices[i] = max(0, prices[i] + step * subgrad[i])`.
    fn update(&mut self, step: f64, subgradient: &[f64]) {
        for (price, &g) in self.prices.iter_mut().zip(subgradient) {
            *price = (*price + step * g).max(0.0);
        }
        self.rebuild_cum();
    }

    fn rebuild_cum(&mut self) {
        let mut running = 0.0;
        for (i, &p) in self.prices.iter().enumerate() {
            running += p;
            self.cum[i + 1] = running;
        }
    }
}

/// One router's reply to a broadcast price vector.
#[derive(Clone, Debug)]
pub struct RouterReply {
    pub router: String,
    /// Priced objective h_u(lambda) of the subproblem.
    pub priced_objective: f64,
    pub solution: FilterSolution,
}

/// One synchronous coordination round.
#[derive(Clone, Debug)]
pub struct CoordinationRound {
    pub k: usize,
    pub prices: PriceVector,
    pub replies: Vec<RouterReply>,
    pub dual_value: f64,
    /// Blacklist addresses filtered at more than one router this round.
    pub conflicts: Vec<u32>,
    /// Feasible per-router assignment recovered from this round, if any.
    pub recovered: Option<Vec<FilterSolution>>,
    pub recovered_total_cd: Option<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct CoordinateOptions {
    pub max_rounds: usize,
    /// step0 for alpha_k = step0 / (1 + k); defaults to
    /// sum(capacity) / (sum(traffic) + 1).
    pub step0: Option<f64>,
    /// Stop once the relative duality gap drops below this.
    pub epsilon: f64,
}

impl Default for CoordinateOptions {
    fn default() -> Self {
        CoordinateOptions { max_rounds: 50, step0: None, epsilon: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct CoordinateResult {
    /// Best feasible assignment found, one solution per router in input
    /// order; None when no round recovered a feasible assignment.
    pub assignments: Option<Vec<FilterSolution>>,
    pub total_cd: Option<u64>,
    pub dual_bound: f64,
    pub rounds: Vec<CoordinationRound>,
    pub recovery_failures: usize,
}

impl CoordinateResult {
    /// Relative duality gap of the best primal, if one exists.
    pub fn gap(&self) -> Option<f64> {
        let total = self.total_cd? as f64;
        let bound = self.dual_bound.max(0.0);
        Some((total - bound) / total.max(1.0))
    }
}

/// Exact local solve with per-prefix costs raised by the prices. Errors on
/// local infeasibility.
pub fn router_subproblem(router: &RouterSpec, prices: &PriceVector) -> Result<RouterReply> {
    let t0 = router.total_traffic();
    if t0 <= router.capacity {
        return Ok(RouterReply {
            router: router.id.clone(),
            priced_objective: 0.0,
            solution: FilterSolution::empty(&router.bad),
        });
    }
    if router.f_max == 0 {
        return Err(Error::infeasible(
            format!("router {} has zero filters but excess traffic", router.id),
            Some(0),
        ));
    }
    let mut tree = LcpTree::build_over_sets(&[&router.bad, &router.good], router.bad.width())?;
    tree.annotate(&router.good, &router.bad)?;
    let root = tree.root().expect("router sees traffic");
    let cost = |id: NodeId| {
        let node = tree.node(id);
        node.good() as f64 + prices.prefix_price(&node.prefix())
    };
    let dp = FloodingDp::compute(&tree, cost, router.f_max, router.capacity, Exec::Sequential)?;
    let value = dp.value_at(root, router.f_max, router.capacity);
    let mut chosen = Vec::new();
    dp.reconstruct(root, router.f_max, router.capacity, &mut chosen);
    Ok(RouterReply {
        router: router.id.clone(),
        priced_objective: value,
        solution: nodes_to_solution(&tree, &router.bad, &chosen),
    })
}

/// Resolve duplicated coverage in a round: every conflicted address keeps
/// the covering filter with the largest price-adjusted benefit
/// (bad - good - price), the rest are dropped, and routers that lost
/// filters re-solve their residual instance with the already-claimed
/// addresses off limits. Returns per-router feasible solutions.
pub fn recover_primal(
    routers: &[RouterSpec],
    replies: &[RouterReply],
    prices: &PriceVector,
    global_bad: &WeightedAddressSet,
) -> Result<Vec<FilterSolution>> {
    assert_eq!(routers.len(), replies.len());
    // Who covers each blacklist address?
    let mut coverers: Vec<Vec<(usize, Prefix)>> = vec![Vec::new(); global_bad.len()];
    let addrs: Vec<u32> = global_bad.addresses().collect();
    for (u, reply) in replies.iter().enumerate() {
        for p in &reply.solution.filters {
            let a = addrs.partition_point(|&v| v < p.low());
            let b = addrs.partition_point(|&v| v <= p.high());
            for slot in &mut coverers[a..b] {
                slot.push((u, *p));
            }
        }
    }

    // Pick winners per conflicted address; losers' filters are dropped.
    let benefit = |u: usize, p: &Prefix| {
        let spec = &routers[u];
        let b: u64 =
            spec.bad.iter().filter(|&(v, _)| p.contains_value(v)).map(|(_, w)| w).sum();
        let g: u64 =
            spec.good.iter().filter(|&(v, _)| p.contains_value(v)).map(|(_, w)| w).sum();
        b as f64 - g as f64 - prices.prefix_price(p)
    };
    let mut dropped: Vec<std::collections::BTreeSet<Prefix>> = vec![Default::default(); routers.len()];
    for slot in coverers.iter().filter(|s| s.len() > 1) {
        let winner = slot
            .iter()
            .map(|&(u, p)| (u, p, benefit(u, &p)))
            .max_by(|a, b| {
                a.2.partial_cmp(&b.2)
                    .unwrap()
                    .then_with(|| routers[b.0].id.cmp(&routers[a.0].id))
                    .then_with(|| b.1.cmp(&a.1))
            })
            .map(|(u, p, _)| (u, p))
            .expect("nonempty conflict slot");
        for &(u, p) in slot {
            if (u, p) != winner {
                dropped[u].insert(p);
            }
        }
    }

    let mut result: Vec<Option<FilterSolution>> = replies
        .iter()
        .enumerate()
        .map(|(u, r)| dropped[u].is_empty().then(|| r.solution.clone()))
        .collect();

    // Addresses already claimed by surviving filters.
    let mut claimed: std::collections::HashSet<u32> = Default::default();
    for (u, reply) in replies.iter().enumerate() {
        for p in &reply.solution.filters {
            if !dropped[u].contains(p) {
                claimed.extend(addrs.iter().copied().filter(|&v| p.contains_value(v)));
            }
        }
    }

    // Re-solve the dropping routers in id order, claiming as we go.
    let mut order: Vec<usize> = (0..routers.len()).filter(|&u| !dropped[u].is_empty()).collect();
    order.sort_by(|&a, &b| routers[a].id.cmp(&routers[b].id));
    for u in order {
        let spec = &routers[u];
        let kept: Vec<Prefix> = replies[u]
            .solution
            .filters
            .iter()
            .copied()
            .filter(|p| !dropped[u].contains(p))
            .collect();
        let own_claims: std::collections::HashSet<u32> =
            addrs.iter().copied().filter(|&v| kept.iter().any(|p| p.contains_value(v))).collect();
        let forbidden: Vec<u32> = addrs
            .iter()
            .copied()
            .filter(|v| claimed.contains(v) && !own_claims.contains(v))
            .collect();

        let mut tree = LcpTree::build_over_sets(&[&spec.bad, &spec.good], spec.bad.width())?;
        tree.annotate(&spec.good, &spec.bad)?;
        let root = tree.root().expect("nonempty");
        let cost = |id: NodeId| {
            let node = tree.node(id);
            let p = node.prefix();
            if forbidden.iter().any(|&v| p.contains_value(v)) {
                f64::INFINITY
            } else {
                node.good() as f64
            }
        };
        let dp = FloodingDp::compute(&tree, cost, spec.f_max, spec.capacity, Exec::Sequential)?;
        let value = dp.value_at(root, spec.f_max, spec.capacity);
        if !value.is_finite() {
            return Err(Error::infeasible(
                format!("router {} cannot meet capacity after conflict drops", spec.id),
                None,
            ));
        }
        let mut chosen = Vec::new();
        dp.reconstruct(root, spec.f_max, spec.capacity, &mut chosen);
        let sol = nodes_to_solution(&tree, &spec.bad, &chosen);
        for p in &sol.filters {
            claimed.extend(addrs.iter().copied().filter(|&v| p.contains_value(v)));
        }
        result[u] = Some(sol);
    }

    let result: Vec<FilterSolution> = result.into_iter().map(|s| s.expect("filled")).collect();
    check_assignment(routers, &result, global_bad)?;
    Ok(result)
}

/// Machine check of all three constraint families: per-router budgets,
/// per-router capacities, and single coverage of every blacklist address.
pub fn check_assignment(
    routers: &[RouterSpec],
    assignment: &[FilterSolution],
    global_bad: &WeightedAddressSet,
) -> Result<()> {
    if routers.len() != assignment.len() {
        return Err(Error::Scenario("assignment length mismatch".into()));
    }
    for (spec, sol) in routers.iter().zip(assignment) {
        crate::solution::check_non_overlapping(&sol.filters)?;
        if sol.filters.len() > spec.f_max {
            return Err(Error::Scenario(format!("router {} exceeds its filter budget", spec.id)));
        }
        let rescored =
            crate::solution::score(crate::solution::ObjectiveKind::Flooding, &sol.filters, &spec.good, &spec.bad)?;
        if rescored.residual_traffic(&spec.good, &spec.bad) > spec.capacity {
            return Err(Error::Scenario(format!("router {} exceeds its capacity", spec.id)));
        }
    }
    for v in global_bad.addresses() {
        let coverage: usize = assignment
            .iter()
            .map(|sol| usize::from(sol.filters.iter().any(|p| p.contains_value(v))))
            .sum();
        if coverage > 1 {
            return Err(Error::Scenario(format!("address {v} filtered at {coverage} routers")));
        }
    }
    Ok(())
}

/// Synchronous price coordination: broadcast prices, collect independent
/// router solves, recover a feasible assignment, and update prices by the
/// projected subgradient on coverage counts. Returns the best assignment
/// and the dual bound; convergence to a zero gap is not guaranteed.
pub fn coordinate(
    routers: &[RouterSpec],
    global_bad: &WeightedAddressSet,
    opts: &CoordinateOptions,
    exec: Exec,
) -> Result<CoordinateResult> {
    if routers.is_empty() {
        return Err(Error::Scenario("no routers".into()));
    }
    let mut ids: Vec<&str> = routers.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != routers.len() {
        return Err(Error::Scenario("router ids must be unique".into()));
    }
    for r in routers {
        if r.bad.width() != global_bad.width() || r.good.width() != global_bad.width() {
            return Err(Error::WidthMismatch { expected: global_bad.width(), got: r.bad.width() });
        }
        // Individual feasibility up front; a zero-price solve surfaces it.
        router_subproblem(r, &PriceVector::zeros(global_bad))?;
    }

    let total_capacity: u64 = routers.iter().map(|r| r.capacity).sum();
    let total_traffic: u64 = routers.iter().map(|r| r.total_traffic()).sum();
    let step0 = opts.step0.unwrap_or(total_capacity as f64 / (total_traffic as f64 + 1.0));
    let addrs: Vec<u32> = global_bad.addresses().collect();

    let mut prices = PriceVector::zeros(global_bad);
    let mut rounds: Vec<CoordinationRound> = Vec::new();
    let mut best: Option<(u64, Vec<FilterSolution>)> = None;
    let mut dual_bound = f64::NEG_INFINITY;
    let mut recovery_failures = 0usize;

    for k in 0..opts.max_rounds {
        // Broadcast prices; routers answer independently (order-free).
        let replies: Vec<RouterReply> = exec::map_indexed(exec, routers.len(), |u| {
            router_subproblem(&routers[u], &prices).expect("feasibility checked up front")
        });
        // Sum in router-id order so the dual value is permutation-invariant.
        let mut by_id: Vec<usize> = (0..replies.len()).collect();
        by_id.sort_by(|&a, &b| replies[a].router.cmp(&replies[b].router));
        let dual_value: f64 =
            by_id.iter().map(|&u| replies[u].priced_objective).sum::<f64>() - prices.total();
        dual_bound = dual_bound.max(dual_value);

        let coverage: Vec<usize> = addrs
            .iter()
            .map(|&v| {
                replies
                    .iter()
                    .map(|r| usize::from(r.solution.filters.iter().any(|p| p.contains_value(v))))
                    .sum()
            })
            .collect();
        let conflicts: Vec<u32> = addrs
            .iter()
            .zip(&coverage)
            .filter(|&(_, &c)| c > 1)
            .map(|(&v, _)| v)
            .collect();

        let (recovered, recovered_total_cd) =
            match recover_primal(routers, &replies, &prices, global_bad) {
                Ok(assignment) => {
                    let total: u64 = assignment.iter().map(|s| s.collateral_damage).sum();
                    if best.as_ref().is_none_or(|(b, _)| total < *b) {
                        best = Some((total, assignment.clone()));
                    }
                    (Some(assignment), Some(total))
                }
                Err(_) => {
                    recovery_failures += 1;
                    (None, None)
                }
            };

        rounds.push(CoordinationRound {
            k,
            prices: prices.clone(),
            replies,
            dual_value,
            conflicts: conflicts.clone(),
            recovered,
            recovered_total_cd,
        });

        if let Some((total, _)) = &best {
            let gap = (*total as f64 - dual_bound.max(0.0)) / (*total as f64).max(1.0);
            if gap < opts.epsilon {
                break;
            }
        }
        let subgradient: Vec<f64> = coverage.iter().map(|&c| c as f64 - 1.0).collect();
        prices.update(step0 / (1.0 + k as f64), &subgradient);
    }

    let (total_cd, assignments) = match best {
        Some((total, assignment)) => (Some(total), Some(assignment)),
        None => (None, None),
    };
    Ok(CoordinateResult {
        assignments,
        total_cd,
        dual_bound: dual_bound.max(0.0),
        rounds,
        recovery_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flooding::solve_flooding;
    use crate::oracle::{brute_force_joint_flooding, EnumerationBudget, OracleRouter};
    use crate::traffic::Role;
    use rand::{Rng, SeedableRng};

    fn set(width: u8, role: Role, entries: &[(u32, u64)]) -> WeightedAddressSet {
        WeightedAddressSet::from_entries(width, role, entries.iter().copied()).unwrap()
    }

    fn router(id: &str, f_max: usize, capacity: u64, bad: &[(u32, u64)], good: &[(u32, u64)]) -> RouterSpec {
        RouterSpec {
            id: id.into(),
            f_max,
            capacity,
            good: set(6, Role::Good, good),
            bad: set(6, Role::Bad, bad),
        }
    }

    #[test]
    fn zero_prices_match_plain_flooding() {
        let r = router("gw", 2, 15, &[(2, 10), (9, 10), (40, 10)], &[(3, 5), (41, 5)]);
        let prices = PriceVector::zeros(&r.bad);
        let reply = router_subproblem(&r, &prices).unwrap();
        let plain = solve_flooding(&r.instance().unwrap(), Exec::Sequential).unwrap();
        assert_eq!(reply.solution.collateral_damage, plain.collateral_damage);
        assert_eq!(reply.priced_objective, plain.collateral_damage as f64);
    }

    #[test]
    fn slack_capacity_returns_empty() {
        let r = router("gw", 2, 1000, &[(2, 10)], &[(3, 5)]);
        let reply = router_subproblem(&r, &PriceVector::zeros(&r.bad)).unwrap();
        assert!(reply.solution.filters.is_empty());
    }

    #[test]
    fn huge_price_steers_coverage_away() {
        // Two bad clusters; capacity requires blocking only one of them.
        let r = router("gw", 1, 20, &[(2, 10), (3, 10), (40, 10), (41, 10)], &[]);
        let global = r.bad.clone();
        let mut prices = PriceVector::zeros(&global);
        // Price address 2 sky-high: the chosen filter must avoid it.
        let idx = prices.addrs.iter().position(|&v| v == 2).unwrap();
        prices.prices[idx] = 1e6;
        prices.rebuild_cum();
        let reply = router_subproblem(&r, &prices).unwrap();
        assert!(reply.solution.filters.iter().all(|p| !p.contains_value(2)));
        assert!(reply.solution.residual_traffic(&r.good, &r.bad) <= 20);
    }

    #[test]
    fn single_router_coordination_equals_flooding() {
        let r = router("gw", 2, 12, &[(2, 10), (9, 10), (40, 10)], &[(3, 5), (41, 5)]);
        let global = r.bad.clone();
        let plain = solve_flooding(&r.instance().unwrap(), Exec::Sequential).unwrap();
        let result =
            coordinate(&[r], &global, &CoordinateOptions::default(), Exec::Sequential).unwrap();
        assert_eq!(result.total_cd, Some(plain.collateral_damage));
    }

    #[test]
    fn disjoint_blacklists_leave_prices_at_zero() {
        // Clusters far apart: local solutions never cover the other's bads.
        let r1 = router("gw1", 2, 5, &[(2, 10), (3, 10)], &[(1, 5)]);
        let r2 = router("gw2", 2, 5, &[(40, 10), (41, 10)], &[(42, 5)]);
        let mut global = r1.bad.clone();
        for (v, w) in r2.bad.iter() {
            global.insert(v, w).unwrap();
        }
        let opts = CoordinateOptions { max_rounds: 4, ..Default::default() };
        let sol1 = solve_flooding(&r1.instance().unwrap(), Exec::Sequential).unwrap();
        let sol2 = solve_flooding(&r2.instance().unwrap(), Exec::Sequential).unwrap();
        let result = coordinate(&[r1, r2], &global, &opts, Exec::Sequential).unwrap();
        for round in &result.rounds {
            assert!(round.conflicts.is_empty());
            assert!(round.prices.iter().all(|(_, p)| p == 0.0));
        }
        assert_eq!(
            result.total_cd,
            Some(sol1.collateral_damage + sol2.collateral_damage)
        );
    }

    #[test]
    fn infeasible_router_fails_before_round_one() {
        let r1 = router("gw1", 2, 5, &[(2, 10)], &[]);
        let r2 = router("gw2", 0, 5, &[(40, 10)], &[]); // zero filters, excess traffic
        let global = {
            let mut g = r1.bad.clone();
            for (v, w) in r2.bad.iter() {
                g.insert(v, w).unwrap();
            }
            g
        };
        let err = coordinate(&[r1, r2], &global, &CoordinateOptions::default(), Exec::Sequential)
            .unwrap_err();
        assert!(err.is_infeasible());
    }

    fn shared_scenario(seed: u64) -> (Vec<RouterSpec>, WeightedAddressSet) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut bad_addrs = std::collections::BTreeSet::new();
        while bad_addrs.len() < 6 {
            bad_addrs.insert(rng.gen_range(0..64u32));
        }
        let bad_entries: Vec<(u32, u64)> =
            bad_addrs.iter().map(|&v| (v, rng.gen_range(4..=10))).collect();
        let global = set(6, Role::Bad, &bad_entries);
        let mut routers = Vec::new();
        for id in ["gw1", "gw2"] {
            let good_entries: Vec<(u32, u64)> = (0..2)
                .map(|_| {
                    let mut v = rng.gen_range(0..64u32);
                    while bad_addrs.contains(&v) {
                        v = rng.gen_range(0..64);
                    }
                    (v, rng.gen_range(1..=6))
                })
                .collect();
            // Per-router view: same blacklist, locally scaled traffic.
            let local_bad: Vec<(u32, u64)> =
                bad_entries.iter().map(|&(v, w)| (v, w + rng.gen_range(0..=3))).collect();
            let bad = set(6, Role::Bad, &local_bad);
            let good = set(6, Role::Good, &good_entries);
            let t0 = bad.total_weight() + good.total_weight();
            routers.push(RouterSpec {
                id: id.into(),
                f_max: 2,
                capacity: rng.gen_range(t0 / 2..t0),
                good,
                bad,
            });
        }
        (routers, global)
    }

    #[test]
    fn recovered_assignments_always_satisfy_constraints() {
        for seed in 0..15 {
            let (routers, global) = shared_scenario(seed);
            let opts = CoordinateOptions { max_rounds: 8, ..Default::default() };
            let Ok(result) = coordinate(&routers, &global, &opts, Exec::Sequential) else {
                continue;
            };
            if let Some(assignment) = &result.assignments {
                check_assignment(&routers, assignment, &global).unwrap();
            }
            // Weak duality on every round against the recovered primal.
            if let Some(total) = result.total_cd {
                for round in &result.rounds {
                    assert!(round.dual_value <= total as f64 + 1e-6);
                }
            }
        }
    }

    #[test]
    fn two_router_recovery_tracks_the_joint_optimum() {
        let budget = EnumerationBudget::default();
        let mut within = 0;
        let mut total = 0;
        for seed in 100..115 {
            let (routers, global) = shared_scenario(seed);
            let oracle_routers: Vec<OracleRouter> = routers
                .iter()
                .map(|r| OracleRouter {
                    good: r.good.clone(),
                    bad: r.bad.clone(),
                    f_max: r.f_max,
                    capacity: r.capacity,
                })
                .collect();
            let global_addrs: Vec<u32> = global.addresses().collect();
            let Ok((opt_cd, _)) =
                brute_force_joint_flooding(&oracle_routers, &global_addrs, &budget)
            else {
                continue;
            };
            let opts = CoordinateOptions { max_rounds: 12, ..Default::default() };
            let result = coordinate(&routers, &global, &opts, Exec::Sequential).unwrap();
            let Some(got) = result.total_cd else { continue };
            total += 1;
            assert!(got >= opt_cd, "primal below the optimum");
            assert!(result.dual_bound <= opt_cd as f64 + 1e-6, "dual above the optimum");
            if got as f64 <= opt_cd as f64 * 1.1 + 1e-9 {
                within += 1;
            }
        }
        assert!(total >= 10, "too few scenarios solved ({total})");
        assert!(within * 10 >= total * 9, "only {within}/{total} within 10% of optimum");
    }

    #[test]
    fn router_order_does_not_change_results() {
        let (routers, global) = shared_scenario(7);
        let opts = CoordinateOptions { max_rounds: 6, ..Default::default() };
        let forward = coordinate(&routers, &global, &opts, Exec::Sequential).unwrap();
        let mut reversed_routers = routers.clone();
        reversed_routers.reverse();
        let reversed = coordinate(&reversed_routers, &global, &opts, Exec::Sequential).unwrap();
        assert_eq!(forward.total_cd, reversed.total_cd);
        assert_eq!(forward.dual_bound, reversed.dual_bound);
        assert_eq!(forward.rounds.len(), reversed.rounds.len());
        for (a, b) in forward.rounds.iter().zip(&reversed.rounds) {
            assert_eq!(a.dual_value, b.dual_value);
            assert_eq!(a.conflicts, b.conflicts);
            assert_eq!(a.recovered_total_cd, b.recovered_total_cd);
        }
    }

    #[test]
    fn conflict_free_round_recovery_is_identity() {
        let r1 = router("gw1", 2, 5, &[(2, 10), (3, 10)], &[(1, 5)]);
        let r2 = router("gw2", 2, 5, &[(40, 10), (41, 10)], &[(42, 5)]);
        let global = {
            let mut g = r1.bad.clone();
            for (v, w) in r2.bad.iter() {
                g.insert(v, w).unwrap();
            }
            g
        };
        let prices = PriceVector::zeros(&global);
        let routers = vec![r1, r2];
        let replies: Vec<RouterReply> =
            routers.iter().map(|r| router_subproblem(r, &prices).unwrap()).collect();
        let recovered = recover_primal(&routers, &replies, &prices, &global).unwrap();
        for (reply, rec) in replies.iter().zip(&recovered) {
            assert_eq!(reply.solution.filters, rec.filters);
        }
    }

    #[test]
    fn parallel_and_sequential_coordination_agree() {
        let (routers, global) = shared_scenario(3);
        let opts = CoordinateOptions { max_rounds: 5, ..Default::default() };
        let seq = coordinate(&routers, &global, &opts, Exec::Sequential).unwrap();
        let par = coordinate(&routers, &global, &opts, Exec::Parallel).unwrap();
        assert_eq!(seq.total_cd, par.total_cd);
        assert_eq!(seq.dual_bound, par.dual_bound);
    }
}
