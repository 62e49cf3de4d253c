//! The capacity-constrained filtering problem: pick at most `f_max`
//! non-overlapping prefixes so that the traffic left unblocked fits under a
//! link capacity, minimizing collateral damage.
//!
//! The exact solver is a pseudo-polynomial DP over the LCP tree of the
//! combined blacklist-and-whitelist address set; each node's table is
//! indexed by (filters, residual-capacity share). A Lagrangian relaxation
//! of the capacity constraint with a projected subgradient on the
//! multiplier provides lower bounds and a cheap primal heuristic for
//! instances where the capacity dimension is too large.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::prefix::Prefix;
use crate::solution::FilterSolution;
use crate::traffic::WeightedAddressSet;
use crate::tree::{LcpTree, NodeId};
use crate::Result;

/// One capacity-constrained instance. Weights are traffic volumes in
/// integer quanta; callers scale real units.
#[derive(Clone, Debug)]
pub struct FloodingInstance {
    pub bad: WeightedAddressSet,
    pub good: WeightedAddressSet,
    pub f_max: usize,
    pub capacity: u64,
}

impl FloodingInstance {
    pub fn new(
        bad: WeightedAddressSet,
        good: WeightedAddressSet,
        f_max: usize,
        capacity: u64,
    ) -> Result<Self> {
        if good.width() != bad.width() {
            return Err(Error::WidthMismatch { expected: bad.width(), got: good.width() });
        }
        Ok(FloodingInstance { bad, good, f_max, capacity })
    }

    /// Total traffic before filtering.
    pub fn total_traffic(&self) -> u64 {
        self.good.total_weight() + self.bad.total_weight()
    }

    /// Maximum traffic blockable with the filter budget: one filter on the
    /// root LCP already blocks everything, so the bound is trivial except
    /// at a zero budget.
    pub fn max_blockable(&self) -> u64 {
        if self.f_max >= 1 {
            self.total_traffic()
        } else {
            0
        }
    }

    fn build_tree(&self) -> Result<LcpTree> {
        let mut tree = LcpTree::build_over_sets(&[&self.bad, &self.good], self.bad.width())?;
        tree.annotate(&self.good, &self.bad)?;
        Ok(tree)
    }
}

/// Values a flooding DP can optimize: exact integers for plain collateral
/// damage, floats for price-adjusted costs.
pub(crate) trait DpValue:
    Copy + PartialOrd + std::ops::Add<Output = Self> + Send + Sync + std::fmt::Debug
{
    const ZERO: Self;
    const INF: Self;
    fn is_finite(self) -> bool;
}

impl DpValue for i64 {
    const ZERO: Self = 0;
    const INF: Self = i64::MAX;
    fn is_finite(self) -> bool {
        self != i64::MAX
    }
}

impl DpValue for f64 {
    const ZERO: Self = 0.0;
    const INF: Self = f64::INFINITY;
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

fn add<V: DpValue>(a: V, b: V) -> V {
    if a.is_finite() && b.is_finite() {
        a + b
    } else {
        V::INF
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FloodChoice {
    Invalid,
    TakeNode,
    Split { n: u32, m: u32 },
}

/// Per-node table over (filters 0..=delta, capacity share 0..cap_limit).
struct FloodTable<V> {
    df: usize,
    dc: usize,
    z: Vec<V>,
    choice: Vec<FloodChoice>,
}

impl<V: DpValue> FloodTable<V> {
    fn get(&self, f: usize, c: usize) -> V {
        self.z[f.min(self.df - 1) * self.dc + c]
    }

    fn choice_at(&self, f: usize, c: usize) -> FloodChoice {
        self.choice[f * self.dc + c]
    }
}

/// Guard against tables that would not fit in memory; the DP is
/// pseudo-polynomial in the capacity, so huge capacities must be rescaled
/// by the caller.
const MAX_TABLE_CELLS: u64 = 80_000_000;

pub(crate) struct FloodingDp<'a, V, C>
where
    V: DpValue,
    C: Fn(NodeId) -> V + Sync,
{
    tree: &'a LcpTree,
    cost: C,
    f_max: usize,
    capacity: u64,
    tables: Vec<Option<FloodTable<V>>>,
}

impl<'a, V, C> FloodingDp<'a, V, C>
where
    V: DpValue,
    C: Fn(NodeId) -> V + Sync,
{
    /// Bottom-up table construction. `cost` maps a node to the objective
    /// charge of filtering it.
    pub(crate) fn compute(
        tree: &'a LcpTree,
        cost: C,
        f_max: usize,
        capacity: u64,
        exec: Exec,
    ) -> Result<Self> {
        let mut cells = 0u64;
        for id in tree.node_ids() {
            let node = tree.node(id);
            if node.is_leaf() || node.traffic() == 0 {
                continue;
            }
            let df = (f_max.min(node.leaf_count() as usize) + 1) as u64;
            let dc = capacity.min(node.traffic() - 1) + 1;
            cells = cells.saturating_add(df.saturating_mul(dc));
        }
        if cells > MAX_TABLE_CELLS {
            return Err(Error::Scenario(format!(
                "capacity-indexed tables would need {cells} cells (limit {MAX_TABLE_CELLS}); \
                 rescale traffic quanta"
            )));
        }
        let mut dp =
            FloodingDp { tree, cost, f_max, capacity, tables: Vec::new() };
        dp.tables = (0..tree.id_bound()).map(|_| None).collect();
        for id in tree.postorder() {
            let node = tree.node(id);
            if node.is_leaf() || node.traffic() == 0 {
                continue; // closed-form nodes need no table
            }
            dp.tables[id as usize] = Some(dp.build_table(id, exec));
        }
        Ok(dp)
    }

    /// z(id, f, c): cheapest filtering of the subtree leaving at most `c`
    /// unblocked traffic with at most `f` filters; INF when infeasible.
    pub(crate) fn value_at(&self, id: NodeId, f: usize, c: u64) -> V {
        let node = self.tree.node(id);
        if node.traffic() <= c {
            return V::ZERO;
        }
        if node.is_leaf() {
            return if f >= 1 { (self.cost)(id) } else { V::INF };
        }
        // c < traffic here, so the table covers index c.
        self.tables[id as usize]
            .as_ref()
            .expect("internal node with traffic has a table")
            .get(f, c as usize)
    }

    fn build_table(&self, id: NodeId, exec: Exec) -> FloodTable<V> {
        let node = self.tree.node(id);
        let [left, right] = node.children().expect("internal node");
        let (t_l, t_r) = (self.tree.node(left).traffic(), self.tree.node(right).traffic());
        let delta_r = self.f_max.min(self.tree.node(right).leaf_count() as usize);
        let delta_l = self.f_max.min(self.tree.node(left).leaf_count() as usize);
        let df = self.f_max.min(node.leaf_count() as usize) + 1;
        let dc = (self.capacity.min(node.traffic() - 1) + 1) as usize;
        let take_cost = (self.cost)(id);

        let fill_row = |f: usize| -> (Vec<V>, Vec<FloodChoice>) {
            let mut zs = Vec::with_capacity(dc);
            let mut choices = Vec::with_capacity(dc);
            for c in 0..dc as u64 {
                // Filtering the node itself blocks the whole subtree.
                let (mut best, mut pick) = if f >= 1 {
                    (take_cost, FloodChoice::TakeNode)
                } else {
                    (V::INF, FloodChoice::Invalid)
                };
                let lo_n = f.saturating_sub(delta_l);
                let hi_n = f.min(delta_r);
                let lo_m = c.saturating_sub(t_l);
                let hi_m = c.min(t_r);
                for n in lo_n..=hi_n {
                    for m in lo_m..=hi_m {
                        let v = add(
                            self.value_at(left, f - n, c - m),
                            self.value_at(right, n, m),
                        );
                        if v < best {
                            best = v;
                            pick = FloodChoice::Split { n: n as u32, m: m as u32 };
                        }
                    }
                }
                zs.push(best);
                choices.push(pick);
            }
            (zs, choices)
        };

        // Rows are independent given the children's tables.
        let rows = if exec.is_parallel() && df * dc > 1024 {
            exec::map_indexed(exec, df, fill_row)
        } else {
            (0..df).map(fill_row).collect()
        };
        let mut z = Vec::with_capacity(df * dc);
        let mut choice = Vec::with_capacity(df * dc);
        for (zs, choices) in rows {
            z.extend(zs);
            choice.extend(choices);
        }
        FloodTable { df, dc, z, choice }
    }

    /// Chosen node set for (f, c), preferring fewer filters and shallower
    /// prefixes among equal-value cells.
    pub(crate) fn reconstruct(&self, id: NodeId, f: usize, c: u64, out: &mut Vec<NodeId>) {
        let node = self.tree.node(id);
        if node.traffic() <= c {
            return;
        }
        if node.is_leaf() {
            out.push(id);
            return;
        }
        let table = self.tables[id as usize].as_ref().expect("has table");
        let f = f.min(table.df - 1);
        let target = table.get(f, c as usize);
        let f = (0..=f)
            .find(|&g| table.get(g, c as usize) == target)
            .expect("target value present");
        match table.choice_at(f, c as usize) {
            FloodChoice::TakeNode => out.push(id),
            FloodChoice::Split { n, m } => {
                let [l, r] = node.children().expect("internal");
                self.reconstruct(l, f - n as usize, c - u64::from(m), out);
                self.reconstruct(r, n as usize, u64::from(m), out);
            }
            FloodChoice::Invalid => unreachable!("reconstructing an infeasible cell"),
        }
    }
}

/// Count blacklist addresses covered by the chosen prefixes.
fn covered_bad_count(bad: &WeightedAddressSet, filters: &[Prefix]) -> u64 {
    let sorted: Vec<u32> = bad.addresses().collect();
    filters
        .iter()
        .map(|p| {
            let a = sorted.partition_point(|&v| v < p.low());
            let b = sorted.partition_point(|&v| v <= p.high());
            (b - a) as u64
        })
        .sum()
}

pub(crate) fn nodes_to_solution(
    tree: &LcpTree,
    bad: &WeightedAddressSet,
    chosen: &[NodeId],
) -> FilterSolution {
    let mut filters = Vec::with_capacity(chosen.len());
    let (mut cd, mut blocked_bad) = (0u64, 0u64);
    for &id in chosen {
        let node = tree.node(id);
        filters.push(node.prefix());
        cd += node.good();
        blocked_bad += node.bad();
    }
    filters.sort();
    let covered = covered_bad_count(bad, &filters);
    FilterSolution {
        filters_used: filters.len(),
        filters,
        collateral_damage: cd,
        blocked_bad,
        unblocked_bad_count: bad.len() as u64 - covered,
        objective: cd as i64,
    }
}

/// Exact solve: minimum collateral damage leaving at most `capacity`
/// unblocked traffic. Infeasible instances report the maximum blockable
/// traffic as a certificate.
pub fn solve_flooding(instance: &FloodingInstance, exec: Exec) -> Result<FilterSolution> {
    let t0 = instance.total_traffic();
    if t0 <= instance.capacity {
        return Ok(FilterSolution::empty(&instance.bad));
    }
    if instance.f_max == 0 {
        return Err(Error::infeasible(
            format!(
                "must block {} traffic units but no filters are available",
                t0 - instance.capacity
            ),
            Some(instance.max_blockable()),
        ));
    }
    let tree = instance.build_tree()?;
    let root = tree.root().expect("nonempty union");
    let dp = FloodingDp::compute(&tree, |id| tree.node(id).good() as i64, instance.f_max, instance.capacity, exec)?;
    let value = dp.value_at(root, instance.f_max, instance.capacity);
    debug_assert!(value.is_finite(), "one root filter always meets capacity");
    let mut chosen = Vec::new();
    dp.reconstruct(root, instance.f_max, instance.capacity, &mut chosen);
    let sol = nodes_to_solution(&tree, &instance.bad, &chosen);
    debug_assert_eq!(sol.collateral_damage as i64, value);
    debug_assert!(sol.residual_traffic(&instance.good, &instance.bad) <= instance.capacity);
    Ok(sol)
}

/// Expand a feasible solution to exactly `f_max` filters without increasing
/// collateral damage: split chosen internal nodes into their children, then
/// add uncovered bad-only leaves. Errors when no zero-cost expansion exists.
pub fn expand_to_budget(
    instance: &FloodingInstance,
    filters: &[Prefix],
    f_max: usize,
) -> Result<Vec<Prefix>> {
    if filters.len() > f_max {
        return Err(Error::Scenario(format!(
            "solution already uses {} filters (budget {f_max})",
            filters.len()
        )));
    }
    let tree = instance.build_tree()?;
    let mut ids: Vec<NodeId> = Vec::with_capacity(filters.len());
    for p in filters {
        let id = tree
            .node_ids()
            .find(|&id| tree.node(id).prefix() == *p)
            .ok_or_else(|| Error::Scenario(format!("filter {p} is not an LCP-tree node")))?;
        ids.push(id);
    }
    // Splitting any internal filter keeps coverage and cost: on the combined
    // tree a node's good weight equals its children's sum.
    let mut queue: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> =
        ids.iter().map(|&id| std::cmp::Reverse(id)).collect();
    let mut result: Vec<NodeId> = Vec::new();
    while let Some(std::cmp::Reverse(id)) = queue.pop() {
        let remaining = queue.len() + result.len() + 1;
        if remaining < f_max {
            if let Some([l, r]) = tree.node(id).children() {
                queue.push(std::cmp::Reverse(l));
                queue.push(std::cmp::Reverse(r));
                continue;
            }
        }
        result.push(id);
    }
    // Top up with uncovered bad-only leaves (zero collateral damage).
    if result.len() < f_max {
        let chosen_prefixes: Vec<Prefix> = result.iter().map(|&id| tree.node(id).prefix()).collect();
        let mut spare: Vec<u32> = instance
            .bad
            .addresses()
            .filter(|&v| !chosen_prefixes.iter().any(|p| p.contains_value(v)))
            .collect();
        spare.sort_unstable();
        for v in spare {
            if result.len() == f_max {
                break;
            }
            let leaf = tree.leaf_id(v).expect("bad addresses are leaves");
            if tree.node(leaf).good() == 0 {
                result.push(leaf);
            }
        }
    }
    if result.len() != f_max {
        return Err(Error::Scenario(format!(
            "cannot expand to {f_max} filters without extra collateral damage (reached {})",
            result.len()
        )));
    }
    let mut out: Vec<Prefix> = result.iter().map(|&id| tree.node(id).prefix()).collect();
    out.sort();
    Ok(out)
}

/// One subgradient iteration of the relaxation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: usize,
    pub lambda: f64,
    pub dual_value: f64,
    pub subgradient: f64,
    pub capacity_feasible: bool,
    pub primal_cd: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct LagrangianResult {
    /// Best lower bound seen (weak duality: never above the exact optimum).
    pub dual_bound: f64,
    /// Best capacity-feasible iterate, if any.
    pub best_primal: Option<FilterSolution>,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StepSchedule {
    /// alpha_k = step0 / (1 + k). Defaults to capacity / (t0 + 1).
    pub step0: Option<f64>,
}

/// Relax the capacity constraint with multiplier `lambda >= 0`: each inner
/// iteration is a subset-selection DP with signed node costs
/// `(1 - lambda) * good - lambda * bad`, solved exactly on the combined
/// tree. Every capacity-feasible iterate is recorded; the best is returned
/// with the dual bound.
pub fn solve_flooding_lagrangian(
    instance: &FloodingInstance,
    max_iters: usize,
    schedule: StepSchedule,
) -> Result<LagrangianResult> {
    let t0 = instance.total_traffic();
    let capacity = instance.capacity;
    let tree = instance.build_tree()?;
    let step0 = schedule.step0.unwrap_or(capacity as f64 / (t0 as f64 + 1.0));

    let mut lambda = 0.0f64;
    let mut dual_bound = f64::NEG_INFINITY;
    let mut best_primal: Option<FilterSolution> = None;
    let mut trace = Vec::with_capacity(max_iters);
    for k in 0..max_iters {
        let cost =
            |id: NodeId| (1.0 - lambda) * tree.node(id).good() as f64 - lambda * tree.node(id).bad() as f64;
        let (inner_value, chosen) = select_min_cost(&tree, &cost, instance.f_max);
        let dual_value = inner_value + lambda * (t0 as f64 - capacity as f64);
        dual_bound = dual_bound.max(dual_value);

        let blocked: u64 = chosen.iter().map(|&id| tree.node(id).traffic()).sum();
        let residual = t0 - blocked;
        let subgradient = residual as f64 - capacity as f64;
        let capacity_feasible = residual <= capacity;
        let mut primal_cd = None;
        if capacity_feasible {
            let sol = nodes_to_solution(&tree, &instance.bad, &chosen);
            primal_cd = Some(sol.collateral_damage);
            if best_primal
                .as_ref()
                .is_none_or(|b| sol.collateral_damage < b.collateral_damage)
            {
                best_primal = Some(sol);
            }
        }
        trace.push(TracePoint { k, lambda, dual_value, subgradient, capacity_feasible, primal_cd });

        // Certified optimal: the bound meets the incumbent.
        if let Some(best) = &best_primal {
            if best.collateral_damage as f64 <= dual_bound + 1e-9 {
                break;
            }
        }
        let alpha = step0 / (1.0 + k as f64);
        lambda = (lambda + alpha * subgradient).max(0.0);
    }
    Ok(LagrangianResult { dual_bound: dual_bound.max(0.0), best_primal, trace })
}

/// Select at most `f_max` non-overlapping tree nodes minimizing the summed
/// signed cost (nothing is always allowed). Used by the Lagrangian inner
/// problem and the priced router subproblems.
pub(crate) fn select_min_cost(
    tree: &LcpTree,
    cost: &(impl Fn(NodeId) -> f64 + Sync),
    f_max: usize,
) -> (f64, Vec<NodeId>) {
    let Some(root) = tree.root() else { return (0.0, Vec::new()) };
    if f_max == 0 {
        return (0.0, Vec::new());
    }
    #[derive(Clone, Copy)]
    enum Pick {
        Nothing,
        TakeNode,
        LeftOnly,
        RightOnly,
        Split(u32),
    }
    struct Table {
        z: Vec<f64>,
        pick: Vec<Pick>,
    }
    let mut tables: Vec<Option<Table>> = (0..tree.id_bound()).map(|_| None).collect();
    for id in tree.postorder() {
        let node = tree.node(id);
        let delta = f_max.min(node.leaf_count() as usize);
        let mut z = vec![0.0; delta + 1];
        let mut pick = vec![Pick::Nothing; delta + 1];
        match node.children() {
            None => {
                let take = cost(id);
                if take < 0.0 {
                    z[1] = take;
                    pick[1] = Pick::TakeNode;
                }
            }
            Some([l, r]) => {
                let (lt, rt) = (
                    tables[l as usize].as_ref().expect("child table"),
                    tables[r as usize].as_ref().expect("child table"),
                );
                let (dl, dr) = (lt.z.len() - 1, rt.z.len() - 1);
                let take = cost(id);
                let mut best = take;
                let mut best_pick = Pick::TakeNode;
                if lt.z[1.min(dl)] < best {
                    best = lt.z[1.min(dl)];
                    best_pick = Pick::LeftOnly;
                }
                if rt.z[1.min(dr)] < best {
                    best = rt.z[1.min(dr)];
                    best_pick = Pick::RightOnly;
                }
                if 0.0 < best {
                    // Selecting nothing in this subtree beats every option.
                    best = 0.0;
                    best_pick = Pick::Nothing;
                }
                z[1] = best;
                pick[1] = best_pick;
                for f in 2..=delta {
                    // Filtering the node itself stays an option at any
                    // budget; splits usually beat it but need not.
                    let (mut best, mut best_pick) = (take, Pick::TakeNode);
                    for n in f.saturating_sub(dl)..=f.min(dr) {
                        let v = lt.z[f - n] + rt.z[n];
                        if v < best {
                            best = v;
                            best_pick = Pick::Split(n as u32);
                        }
                    }
                    z[f] = best;
                    pick[f] = best_pick;
                }
            }
        }
        tables[id as usize] = Some(Table { z, pick });
    }

    fn rebuild(
        tree: &LcpTree,
        tables: &[Option<Table>],
        id: NodeId,
        f: usize,
        out: &mut Vec<NodeId>,
    ) {
        let table = tables[id as usize].as_ref().expect("table");
        let f = f.min(table.z.len() - 1);
        let target = table.z[f];
        let f = (0..=f).find(|&g| table.z[g] == target).expect("present");
        match table.pick[f] {
            Pick::Nothing => {}
            Pick::TakeNode => out.push(id),
            Pick::LeftOnly => {
                let [l, _] = tree.node(id).children().expect("internal");
                rebuild(tree, tables, l, 1, out);
            }
            Pick::RightOnly => {
                let [_, r] = tree.node(id).children().expect("internal");
                rebuild(tree, tables, r, 1, out);
            }
            Pick::Split(n) => {
                let [l, r] = tree.node(id).children().expect("internal");
                rebuild(tree, tables, l, f - n as usize, out);
                rebuild(tree, tables, r, n as usize, out);
            }
        }
    }
    let root_table = tables[root as usize].as_ref().expect("root table");
    let value = root_table.z[f_max.min(root_table.z.len() - 1)];
    let mut chosen = Vec::new();
    rebuild(tree, &tables, root, f_max, &mut chosen);
    (value, chosen)
}
