//! Exact dynamic programs for the two static filtering problems over one
//! blacklist: cover every bad address at minimum collateral damage
//! (block-all), or pick the subset of prefixes minimizing collateral damage
//! minus blocked bad weight (block-some).
//!
//! Both run bottom-up over the LCP tree. A node's table holds the optimal
//! value for every filter budget up to `min(f_max, leaves)`; a parent cell
//! is the best split of its budget across the two children. Backtracking
//! stores the chosen split per (node, budget) and reconstructs filter sets
//! on demand, keeping memory linear.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::solution::{FilterSolution, ObjectiveKind};
use crate::traffic::WeightedAddressSet;
use crate::tree::{LcpTree, NodeId};
use crate::Result;

/// Which block problem a DP instance solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Every bad address must be covered by exactly one filter.
    All,
    /// Each bad address may be covered at most once.
    Some,
}

impl SolverKind {
    pub fn objective_kind(self) -> ObjectiveKind {
        match self {
            SolverKind::All => ObjectiveKind::BlockAll,
            SolverKind::Some => ObjectiveKind::BlockSome,
        }
    }
}

/// How one table cell was achieved; `Split(n)` gives n filters to the right
/// child and the rest to the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    Invalid,
    Nothing,
    TakeNode,
    Leaf,
    LeftOnly,
    RightOnly,
    Split(u32),
}

/// Per-node DP table: `z[f]` is the optimal objective for the subtree using
/// at most `f` filters, for `f` up to `min(f_max, leaves)`.
#[derive(Clone, Debug)]
pub(crate) struct DpTable {
    z: Vec<i64>,
    choice: Vec<Choice>,
}

impl DpTable {
    fn delta(&self) -> usize {
        self.z.len() - 1
    }

    /// Value with the budget clamped into the table range.
    fn at(&self, f: usize) -> i64 {
        self.z[f.min(self.delta())]
    }
}

fn leaf_table(kind: SolverKind, node_good: u64, node_bad: u64) -> DpTable {
    match kind {
        SolverKind::All => DpTable {
            z: vec![i64::MAX, node_good as i64],
            choice: vec![Choice::Invalid, Choice::Leaf],
        },
        SolverKind::Some => {
            let take = node_good as i64 - node_bad as i64;
            DpTable {
                z: vec![0, take.min(0)],
                choice: vec![Choice::Nothing, if take < 0 { Choice::Leaf } else { Choice::Nothing }],
            }
        }
    }
}

fn internal_table(
    kind: SolverKind,
    f_max: usize,
    node_good: u64,
    node_bad: u64,
    left: &DpTable,
    right: &DpTable,
    leaves: u32,
) -> DpTable {
    let delta = f_max.min(leaves as usize);
    let (dl, dr) = (left.delta(), right.delta());
    let mut z = Vec::with_capacity(delta + 1);
    let mut choice = Vec::with_capacity(delta + 1);
    match kind {
        SolverKind::All => {
            z.push(i64::MAX);
            choice.push(Choice::Invalid);
            if delta >= 1 {
                z.push(node_good as i64);
                choice.push(Choice::TakeNode);
            }
            for f in 2..=delta {
                let mut best = i64::MAX;
                let mut pick = Choice::Invalid;
                // Both children need at least one filter to stay covered.
                let lo = 1.max(f.saturating_sub(dl));
                let hi = (f - 1).min(dr);
                for n in lo..=hi {
                    let v = left.z[f - n] + right.z[n];
                    if v < best {
                        best = v;
                        pick = Choice::Split(n as u32);
                    }
                }
                debug_assert!(pick != Choice::Invalid);
                z.push(best);
                choice.push(pick);
            }
        }
        SolverKind::Some => {
            z.push(0);
            choice.push(Choice::Nothing);
            if delta >= 1 {
                // One filter: take this node, or give it to one child.
                let take = node_good as i64 - node_bad as i64;
                let (l1, r1) = (left.z[1.min(dl)], right.z[1.min(dr)]);
                let mut best = take;
                let mut pick = Choice::TakeNode;
                if l1 < best {
                    best = l1;
                    pick = Choice::LeftOnly;
                }
                if r1 < best {
                    best = r1;
                    pick = Choice::RightOnly;
                }
                z.push(best);
                choice.push(pick);
            }
            for f in 2..=delta {
                let mut best = i64::MAX;
                let mut pick = Choice::Invalid;
                let lo = f.saturating_sub(dl);
                let hi = f.min(dr);
                for n in lo..=hi {
                    let v = left.z[f - n] + right.z[n];
                    if v < best {
                        best = v;
                        pick = Choice::Split(n as u32);
                    }
                }
                debug_assert!(pick != Choice::Invalid);
                z.push(best);
                choice.push(pick);
            }
        }
    }
    DpTable { z, choice }
}

/// All DP tables of one solve, indexed by tree node id.
pub(crate) struct BlockDp {
    pub(crate) kind: SolverKind,
    pub(crate) f_max: usize,
    tables: Vec<Option<DpTable>>,
}

/// Subtrees whose smaller child holds at least this many leaves are split
/// into parallel tasks; anything smaller runs sequentially.
const PAR_CUTOFF: u32 = 512;

impl BlockDp {
    pub(crate) fn compute(tree: &LcpTree, kind: SolverKind, f_max: usize, exec: Exec) -> Self {
        let mut dp = BlockDp { kind, f_max, tables: Vec::new() };
        dp.tables = vec![None; tree.id_bound()];
        let Some(root) = tree.root() else { return dp };
        if exec.is_parallel() {
            let collector = std::sync::Mutex::new(Vec::with_capacity(tree.len()));
            Self::compute_subtree_par(tree, kind, f_max, root, exec, &collector);
            for (id, table) in collector.into_inner().expect("no panics hold the lock") {
                dp.tables[id as usize] = Some(table);
            }
        } else {
            dp.compute_postorder(tree, root);
        }
        dp
    }

    /// Sequentially fill tables for the subtree under `sub_root`.
    fn compute_postorder(&mut self, tree: &LcpTree, sub_root: NodeId) {
        let mut stack = vec![(sub_root, false)];
        while let Some((id, expanded)) = stack.pop() {
            let node = tree.node(id);
            match node.children() {
                None => {
                    self.tables[id as usize] = Some(leaf_table(self.kind, node.good(), node.bad()));
                }
                Some([l, r]) => {
                    if expanded {
                        let table = internal_table(
                            self.kind,
                            self.f_max,
                            node.good(),
                            node.bad(),
                            self.tables[l as usize].as_ref().expect("child computed"),
                            self.tables[r as usize].as_ref().expect("child computed"),
                            node.leaf_count(),
                        );
                        self.tables[id as usize] = Some(table);
                    } else {
                        stack.push((id, true));
                        stack.push((r, false));
                        stack.push((l, false));
                    }
                }
            }
        }
    }

    /// Parallel evaluation: balanced splits become rayon joins, everything
    /// else falls back to the sequential walk. Finished tables land in the
    /// shared collector; each call returns a copy of its subtree root's
    /// table for the parent's combine step.
    fn compute_subtree_par(
        tree: &LcpTree,
        kind: SolverKind,
        f_max: usize,
        id: NodeId,
        exec: Exec,
        collector: &std::sync::Mutex<Vec<(NodeId, DpTable)>>,
    ) -> DpTable {
        let node = tree.node(id);
        let balanced = node.children().is_some_and(|[l, r]| {
            tree.node(l).leaf_count().min(tree.node(r).leaf_count()) >= PAR_CUTOFF
        });
        if !balanced {
            // Sequential block: compute the whole subtree locally, push the
            // batch once.
            let mut out: Vec<(NodeId, DpTable)> = Vec::new();
            let mut pos: std::collections::HashMap<NodeId, usize> = Default::default();
            let mut stack = vec![(id, false)];
            while let Some((nid, expanded)) = stack.pop() {
                let node = tree.node(nid);
                match node.children() {
                    None => {
                        pos.insert(nid, out.len());
                        out.push((nid, leaf_table(kind, node.good(), node.bad())));
                    }
                    Some([l, r]) if expanded => {
                        let table = internal_table(
                            kind,
                            f_max,
                            node.good(),
                            node.bad(),
                            &out[pos[&l]].1,
                            &out[pos[&r]].1,
                            node.leaf_count(),
                        );
                        pos.insert(nid, out.len());
                        out.push((nid, table));
                    }
                    Some([l, r]) => {
                        stack.push((nid, true));
                        stack.push((r, false));
                        stack.push((l, false));
                    }
                }
            }
            let root_table = out.last().expect("nonempty subtree").1.clone();
            collector.lock().expect("collector lock").extend(out);
            return root_table;
        }
        let [l, r] = node.children().expect("balanced implies internal");
        let (lt, rt) = exec::join(
            exec,
            || Self::compute_subtree_par(tree, kind, f_max, l, exec, collector),
            || Self::compute_subtree_par(tree, kind, f_max, r, exec, collector),
        );
        let table =
            internal_table(kind, f_max, node.good(), node.bad(), &lt, &rt, node.leaf_count());
        collector.lock().expect("collector lock").push((id, table.clone()));
        table
    }

    pub(crate) fn table(&self, id: NodeId) -> &DpTable {
        self.tables[id as usize].as_ref().expect("table computed")
    }

    /// Recompute tables along a child-before-parent path (incremental
    /// updates); returns how many nodes were recomputed.
    pub(crate) fn recompute_path(&mut self, tree: &LcpTree, path: &[NodeId]) -> usize {
        for &id in path {
            let node = tree.node(id);
            let table = match node.children() {
                None => leaf_table(self.kind, node.good(), node.bad()),
                Some([l, r]) => internal_table(
                    self.kind,
                    self.f_max,
                    node.good(),
                    node.bad(),
                    self.tables[l as usize].as_ref().expect("child computed"),
                    self.tables[r as usize].as_ref().expect("child computed"),
                    node.leaf_count(),
                ),
            };
            if self.tables.len() <= id as usize {
                self.tables.resize(id as usize + 1, None);
            }
            self.tables[id as usize] = Some(table);
        }
        path.len()
    }

    pub(crate) fn drop_table(&mut self, id: NodeId) {
        if (id as usize) < self.tables.len() {
            self.tables[id as usize] = None;
        }
    }

    /// Root objective for a budget of `f` filters.
    pub(crate) fn objective_at(&self, tree: &LcpTree, f: usize) -> i64 {
        let root = tree.root().expect("nonempty tree");
        self.table(root).at(f)
    }

    /// Smallest budget achieving the optimum within `f`, then the chosen
    /// node set. Equal-objective ties prefer fewer filters and shallower
    /// prefixes.
    pub(crate) fn reconstruct_at(&self, tree: &LcpTree, f: usize) -> Vec<NodeId> {
        let root = tree.root().expect("nonempty tree");
        let mut chosen = Vec::new();
        self.rebuild(tree, root, f, &mut chosen);
        chosen
    }

    fn rebuild(&self, tree: &LcpTree, id: NodeId, f: usize, out: &mut Vec<NodeId>) {
        let table = self.table(id);
        let f = f.min(table.delta());
        let target = table.z[f];
        let floor = match self.kind {
            SolverKind::All => 1,
            SolverKind::Some => 0,
        };
        let f = (floor..=f).find(|&g| table.z[g] == target).expect("target present");
        match table.choice[f] {
            Choice::Nothing => {}
            Choice::TakeNode | Choice::Leaf => out.push(id),
            Choice::LeftOnly => {
                let [l, _] = tree.node(id).children().expect("internal");
                self.rebuild(tree, l, 1, out);
            }
            Choice::RightOnly => {
                let [_, r] = tree.node(id).children().expect("internal");
                self.rebuild(tree, r, 1, out);
            }
            Choice::Split(n) => {
                let [l, r] = tree.node(id).children().expect("internal");
                self.rebuild(tree, l, f - n as usize, out);
                self.rebuild(tree, r, n as usize, out);
            }
            Choice::Invalid => unreachable!("invalid cell reached in backtracking"),
        }
    }
}

/// Assemble a solution from chosen tree nodes using the node annotations;
/// equals a from-scratch rescore because annotations cover the full sets.
pub(crate) fn solution_from_nodes(
    tree: &LcpTree,
    kind: ObjectiveKind,
    chosen: &[NodeId],
    total_bad_addresses: u64,
) -> FilterSolution {
    let mut filters = Vec::with_capacity(chosen.len());
    let (mut cd, mut blocked_bad, mut covered) = (0u64, 0u64, 0u64);
    for &id in chosen {
        let node = tree.node(id);
        filters.push(node.prefix());
        cd += node.good();
        blocked_bad += node.bad();
        covered += u64::from(node.leaf_count());
    }
    filters.sort();
    let objective = match kind {
        ObjectiveKind::BlockAll | ObjectiveKind::Flooding => cd as i64,
        ObjectiveKind::BlockSome => cd as i64 - blocked_bad as i64,
    };
    FilterSolution {
        filters_used: filters.len(),
        filters,
        collateral_damage: cd,
        blocked_bad,
        unblocked_bad_count: total_bad_addresses - covered,
        objective,
    }
}

fn validated_tree(bad: &WeightedAddressSet, good: &WeightedAddressSet) -> Result<LcpTree> {
    if good.width() != bad.width() {
        return Err(Error::WidthMismatch { expected: bad.width(), got: good.width() });
    }
    let mut tree = LcpTree::build(bad.addresses(), bad.width())?;
    tree.annotate(good, bad)?;
    Ok(tree)
}

/// Cover every bad address with at most `f_max` non-overlapping prefixes,
/// minimizing blocked good weight.
pub fn solve_block_all(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    exec: Exec,
) -> Result<FilterSolution> {
    if bad.is_empty() {
        return Ok(FilterSolution::empty(bad));
    }
    if f_max < 1 {
        return Err(Error::infeasible(
            format!("cannot cover {} addresses with 0 filters", bad.len()),
            None,
        ));
    }
    let tree = validated_tree(bad, good)?;
    let dp = BlockDp::compute(&tree, SolverKind::All, f_max, exec);
    let chosen = dp.reconstruct_at(&tree, f_max);
    Ok(solution_from_nodes(&tree, ObjectiveKind::BlockAll, &chosen, bad.len() as u64))
}

/// Block only the prefixes worth blocking: minimize collateral damage minus
/// blocked bad weight, with at most `f_max` non-overlapping prefixes.
pub fn solve_block_some(
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_max: usize,
    exec: Exec,
) -> Result<FilterSolution> {
    if bad.is_empty() || f_max == 0 {
        return Ok(FilterSolution::empty(bad));
    }
    let tree = validated_tree(bad, good)?;
    let dp = BlockDp::compute(&tree, SolverKind::Some, f_max, exec);
    let chosen = dp.reconstruct_at(&tree, f_max);
    Ok(solution_from_nodes(&tree, ObjectiveKind::BlockSome, &chosen, bad.len() as u64))
}

/// One row of a budget sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub f: usize,
    pub collateral_damage: u64,
    pub unblocked_bad_count: u64,
    pub objective: i64,
}

/// Solve for every budget in `f_range` from a single DP pass: the root
/// table already holds the optimum for every budget up to the range end.
pub fn sweep_filters(
    kind: SolverKind,
    bad: &WeightedAddressSet,
    good: &WeightedAddressSet,
    f_range: std::ops::RangeInclusive<usize>,
    exec: Exec,
) -> Result<Vec<SweepRow>> {
    let (start, end) = (*f_range.start(), *f_range.end());
    if start > end || end > bad.len() {
        return Err(Error::Scenario(format!(
            "sweep range {start}..={end} outside 0..={}",
            bad.len()
        )));
    }
    if kind == SolverKind::All && (start < 1 || bad.is_empty()) {
        return Err(Error::infeasible("block-all sweeps need f >= 1 and a nonempty blacklist", None));
    }
    if bad.is_empty() {
        return Ok((start..=end)
            .map(|f| SweepRow { f, collateral_damage: 0, unblocked_bad_count: 0, objective: 0 })
            .collect());
    }
    let tree = validated_tree(bad, good)?;
    let dp = BlockDp::compute(&tree, kind, end, exec);
    let rows = (start..=end)
        .map(|f| {
            let chosen = dp.reconstruct_at(&tree, f);
            let sol =
                solution_from_nodes(&tree, kind.objective_kind(), &chosen, bad.len() as u64);
            SweepRow {
                f,
                collateral_damage: sol.collateral_damage,
                unblocked_bad_count: sol.unblocked_bad_count,
                objective: dp.objective_at(&tree, f),
            }
        })
        .collect();
    Ok(rows)
}
