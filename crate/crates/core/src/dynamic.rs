//! Incremental maintenance of block-all/block-some solutions as the
//! blacklist changes over time.
//!
//! One insert adds at most one internal node to the LCP tree and
//! invalidates only the tables on the new leaf's root path; one removal
//! drops the leaf plus its parent and recomputes the remaining ancestors.
//! Batches below `n / log2(n)` operations are applied incrementally,
//! larger ones trigger a rebuild from scratch; either way the maintained
//! objective equals a fresh solve on the current blacklist.

use serde::{Deserialize, Serialize};

use crate::block::{solution_from_nodes, BlockDp, SolverKind};
use crate::error::Error;
use crate::exec::Exec;
use crate::solution::FilterSolution;
use crate::traffic::{Role, WeightedAddressSet};
use crate::tree::LcpTree;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Insert,
    Remove,
    GoodUpdate,
}

/// Structured record of one state mutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub op: OpKind,
    pub address: u32,
    /// Tree nodes added (leaf plus any internal node).
    pub new_nodes: usize,
    /// Internal nodes among `new_nodes`; an insert creates at most one.
    pub new_internal_nodes: usize,
    pub removed_nodes: usize,
    pub recomputed_node_count: usize,
    pub objective_before: i64,
    pub objective_after: i64,
    /// Set when an insert was a no-op because the address was present.
    pub duplicate: bool,
}

/// Which path a batch took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchPath {
    Incremental,
    Rebuild,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub path: BatchPath,
    pub ops_applied: usize,
    pub recomputed_node_count: usize,
    pub objective_after: i64,
}

/// A maintained solver state: tree, DP tables, and the current blacklist.
pub struct DynamicSolver {
    kind: SolverKind,
    f_max: usize,
    exec: Exec,
    bad: WeightedAddressSet,
    good: WeightedAddressSet,
    tree: LcpTree,
    dp: BlockDp,
    ops_since_rebuild: usize,
}

impl DynamicSolver {
    pub fn new(
        bad: WeightedAddressSet,
        good: WeightedAddressSet,
        kind: SolverKind,
        f_max: usize,
        exec: Exec,
    ) -> Result<Self> {
        if good.width() != bad.width() {
            return Err(Error::WidthMismatch { expected: bad.width(), got: good.width() });
        }
        if kind == SolverKind::All && f_max < 1 {
            return Err(Error::infeasible("block-all needs at least one filter", None));
        }
        let mut tree = if bad.is_empty() {
            LcpTree::empty(bad.width())?
        } else {
            LcpTree::build(bad.addresses(), bad.width())?
        };
        tree.annotate(&good, &bad)?;
        let dp = BlockDp::compute(&tree, kind, f_max, exec);
        Ok(DynamicSolver { kind, f_max, exec, bad, good, tree, dp, ops_since_rebuild: 0 })
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    pub fn f_max(&self) -> usize {
        self.f_max
    }

    pub fn blacklist(&self) -> &WeightedAddressSet {
        &self.bad
    }

    pub fn whitelist(&self) -> &WeightedAddressSet {
        &self.good
    }

    pub fn tree(&self) -> &LcpTree {
        &self.tree
    }

    pub fn ops_since_rebuild(&self) -> usize {
        self.ops_since_rebuild
    }

    /// Objective of the maintained solution; equals a fresh solve on the
    /// current blacklist.
    pub fn objective(&self) -> i64 {
        if self.tree.is_empty() {
            0
        } else {
            self.dp.objective_at(&self.tree, self.f_max)
        }
    }

    /// The current solution as an immutable snapshot.
    pub fn solution(&self) -> FilterSolution {
        if self.tree.is_empty() {
            return FilterSolution::empty(&self.bad);
        }
        let chosen = self.dp.reconstruct_at(&self.tree, self.f_max);
        solution_from_nodes(&self.tree, self.kind.objective_kind(), &chosen, self.bad.len() as u64)
    }

    /// Insert one blacklist address. Duplicate inserts are no-ops flagged in
    /// the report.
    pub fn insert_ip(&mut self, value: u32, weight: u64) -> Result<ChangeReport> {
        let objective_before = self.objective();
        if self.bad.contains(value) {
            return Ok(ChangeReport {
                op: OpKind::Insert,
                address: value,
                new_nodes: 0,
                new_internal_nodes: 0,
                removed_nodes: 0,
                recomputed_node_count: 0,
                objective_before,
                objective_after: objective_before,
                duplicate: true,
            });
        }
        self.bad.insert(value, weight)?;
        let outcome = self.tree.insert_bad_leaf(value, weight)?;
        let recomputed = self.dp.recompute_path(&self.tree, &outcome.dirty_path);
        self.ops_since_rebuild += 1;
        Ok(ChangeReport {
            op: OpKind::Insert,
            address: value,
            new_nodes: 1 + usize::from(outcome.new_internal.is_some()),
            new_internal_nodes: usize::from(outcome.new_internal.is_some()),
            removed_nodes: 0,
            recomputed_node_count: recomputed,
            objective_before,
            objective_after: self.objective(),
            duplicate: false,
        })
    }

    /// Remove one blacklist address; errors if absent.
    pub fn remove_ip(&mut self, value: u32) -> Result<ChangeReport> {
        if !self.bad.contains(value) {
            return Err(Error::AddressNotFound(u64::from(value)));
        }
        let objective_before = self.objective();
        self.bad.remove(value);
        let leaf_id = self.tree.leaf_id(value).expect("present");
        let parent_id = self.tree.node(leaf_id).parent();
        let outcome = self.tree.remove_leaf(value)?;
        self.dp.drop_table(leaf_id);
        if let Some(parent) = parent_id {
            self.dp.drop_table(parent);
        }
        let removed_nodes = 1 + usize::from(outcome.removed_internal_prefix.is_some());
        let recomputed = self.dp.recompute_path(&self.tree, &outcome.dirty_path);
        self.ops_since_rebuild += 1;
        Ok(ChangeReport {
            op: OpKind::Remove,
            address: value,
            new_nodes: 0,
            new_internal_nodes: 0,
            removed_nodes,
            recomputed_node_count: recomputed,
            objective_before,
            objective_after: self.objective(),
            duplicate: false,
        })
    }

    /// Change (or add/remove by weight) one whitelist address: the good
    /// index is rebuilt and only the containment path is recomputed.
    pub fn set_good_weight(&mut self, value: u32, weight: u64) -> Result<ChangeReport> {
        let objective_before = self.objective();
        self.good.remove(value);
        if weight > 0 {
            self.good.insert(value, weight)?;
        }
        let path = self.tree.refresh_good(&self.good, value)?;
        let recomputed = self.dp.recompute_path(&self.tree, &path);
        self.ops_since_rebuild += 1;
        Ok(ChangeReport {
            op: OpKind::GoodUpdate,
            address: value,
            new_nodes: 0,
            new_internal_nodes: 0,
            removed_nodes: 0,
            recomputed_node_count: recomputed,
            objective_before,
            objective_after: self.objective(),
            duplicate: false,
        })
    }

    /// Whether a batch of `ops` operations takes the incremental path under
    /// the `n / log2(n)` rule (n = current blacklist size).
    pub fn incremental_batch(&self, ops: usize) -> bool {
        let n = self.bad.len();
        n >= 2 && (ops as f64) < n as f64 / (n as f64).log2()
    }

    /// Apply inserts and removes atomically. Conflicting batches error
    /// before any mutation; small batches run incrementally, large ones
    /// rebuild from scratch. Final objectives agree either way.
    pub fn apply_batch(&mut self, inserts: &[(u32, u64)], removes: &[u32]) -> Result<BatchReport> {
        let mut insert_addrs = std::collections::HashSet::new();
        for &(v, _) in inserts {
            if !insert_addrs.insert(v) {
                return Err(Error::BatchConflict(format!("address {v} inserted twice")));
            }
            if self.bad.contains(v) {
                return Err(Error::BatchConflict(format!("address {v} already blacklisted")));
            }
        }
        let mut remove_addrs = std::collections::HashSet::new();
        for &v in removes {
            if !remove_addrs.insert(v) {
                return Err(Error::BatchConflict(format!("address {v} removed twice")));
            }
            if insert_addrs.contains(&v) {
                return Err(Error::BatchConflict(format!("address {v} both inserted and removed")));
            }
            if !self.bad.contains(v) {
                return Err(Error::BatchConflict(format!("address {v} not blacklisted")));
            }
        }

        let ops = inserts.len() + removes.len();
        if self.incremental_batch(ops) {
            let mut recomputed = 0;
            for &(v, w) in inserts {
                recomputed += self.insert_ip(v, w)?.recomputed_node_count;
            }
            for &v in removes {
                recomputed += self.remove_ip(v)?.recomputed_node_count;
            }
            Ok(BatchReport {
                path: BatchPath::Incremental,
                ops_applied: ops,
                recomputed_node_count: recomputed,
                objective_after: self.objective(),
            })
        } else {
            for &(v, w) in inserts {
                self.bad.insert(v, w)?;
            }
            for &v in removes {
                self.bad.remove(v);
            }
            self.rebuild()?;
            Ok(BatchReport {
                path: BatchPath::Rebuild,
                ops_applied: ops,
                recomputed_node_count: self.tree.len(),
                objective_after: self.objective(),
            })
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        self.tree = if self.bad.is_empty() {
            LcpTree::empty(self.bad.width())?
        } else {
            LcpTree::build(self.bad.addresses(), self.bad.width())?
        };
        self.tree.annotate(&self.good, &self.bad)?;
        self.dp = BlockDp::compute(&self.tree, self.kind, self.f_max, self.exec);
        self.ops_since_rebuild = 0;
        Ok(())
    }

    /// Text snapshot of the state (config plus both sets); the tree is
    /// rebuilt on restore.
    pub fn snapshot(&self) -> String {
        let mut out = String::from("# filtkit dynamic state v1\n");
        out.push_str(&format!("width = {}\n", self.bad.width()));
        out.push_str(&format!("f_max = {}\n", self.f_max));
        out.push_str(&format!(
            "kind = {}\n",
            match self.kind {
                SolverKind::All => "all",
                SolverKind::Some => "some",
            }
        ));
        out.push_str("[bad]\n");
        out.push_str(&self.bad.to_text());
        out.push_str("[good]\n");
        out.push_str(&self.good.to_text());
        out
    }

    pub fn restore(text: &str, exec: Exec) -> Result<Self> {
        let mut width: Option<u8> = None;
        let mut f_max: Option<usize> = None;
        let mut kind: Option<SolverKind> = None;
        let mut section = "";
        let mut bad_lines = String::new();
        let mut good_lines = String::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[bad]" => {
                    section = "bad";
                    continue;
                }
                "[good]" => {
                    section = "good";
                    continue;
                }
                _ => {}
            }
            match section {
                "bad" => {
                    bad_lines.push_str(line);
                    bad_lines.push('\n');
                }
                "good" => {
                    good_lines.push_str(line);
                    good_lines.push('\n');
                }
                _ => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| Error::Scenario(format!("bad state line {line:?}")))?;
                    match (key.trim(), value.trim()) {
                        ("width", v) => width = Some(v.parse().map_err(|_| Error::Scenario(format!("bad width {v:?}")))?),
                        ("f_max", v) => f_max = Some(v.parse().map_err(|_| Error::Scenario(format!("bad f_max {v:?}")))?),
                        ("kind", "all") => kind = Some(SolverKind::All),
                        ("kind", "some") => kind = Some(SolverKind::Some),
                        (k, v) => return Err(Error::Scenario(format!("bad state entry {k} = {v}"))),
                    }
                }
            }
        }
        let width = width.ok_or_else(|| Error::Scenario("state missing width".into()))?;
        let f_max = f_max.ok_or_else(|| Error::Scenario("state missing f_max".into()))?;
        let kind = kind.ok_or_else(|| Error::Scenario("state missing kind".into()))?;
        let bad = WeightedAddressSet::load(std::io::Cursor::new(bad_lines), Role::Bad, width)?;
        let good = WeightedAddressSet::load(std::io::Cursor::new(good_lines), Role::Good, width)?;
        DynamicSolver::new(bad, good, kind, f_max, exec)
    }

    /// Fresh solve on the current blacklist, for verification.
    pub fn fresh_objective(&self) -> Result<i64> {
        if self.bad.is_empty() {
            return Ok(0);
        }
        let sol = match self.kind {
            SolverKind::All => {
                crate::block::solve_block_all(&self.bad, &self.good, self.f_max, self.exec)?
            }
            SolverKind::Some => {
                crate::block::solve_block_some(&self.bad, &self.good, self.f_max, self.exec)?
            }
        };
        Ok(sol.objective)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn unit_sets(bl: &[u32], width: u8) -> (WeightedAddressSet, WeightedAddressSet) {
        let bad = WeightedAddressSet::from_entries(width, Role::Bad, bl.iter().map(|&v| (v, 1)))
            .unwrap();
        let space = crate::prefix::space_size(width) as u32;
        let good = WeightedAddressSet::from_entries(
            width,
            Role::Good,
            (0..space).filter(|v| !bl.contains(v)).map(|v| (v, 1)),
        )
        .unwrap();
        (bad, good)
    }

    #[test]
    fn six_bit_insert_recomputes_only_the_root_path() {
        let bl = [3u32, 10, 15, 17, 22, 31, 32, 33, 57, 58];
        let (bad, good) = unit_sets(&bl, 6);
        let mut state = DynamicSolver::new(bad, good, SolverKind::All, 4, Exec::Sequential)
            .unwrap();
        let nodes_before = state.tree().len();
        let report = state.insert_ip(37, 1).unwrap();
        assert_eq!(report.new_nodes, 2); // one leaf, exactly one internal
        assert_eq!(state.tree().len(), nodes_before + 2);
        assert!(report.recomputed_node_count <= state.tree().depth() + 1);
        assert_eq!(report.objective_after, state.fresh_objective().unwrap());
    }

    #[test]
    fn covered_insert_keeps_the_filter_set() {
        let (bad, good) = unit_sets(&[0, 3, 4, 5, 7, 8, 10, 11, 12], 4);
        let mut state = DynamicSolver::new(bad, good, SolverKind::All, 4, Exec::Sequential)
            .unwrap();
        let before = state.solution();
        let covered = before.filters.iter().find_map(|p| {
            (p.low()..=p.high()).find(|&v| !state.blacklist().contains(v))
        });
        let covered = covered.expect("an aggregated filter covers some gap address");
        let report = state.insert_ip(covered, 1).unwrap();
        assert!(!report.duplicate);
        assert_eq!(state.solution().filters, before.filters);
    }

    #[test]
    fn duplicate_insert_is_flagged_noop() {
        let (bad, good) = unit_sets(&[1, 9], 4);
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::All, 2, Exec::Sequential).unwrap();
        let report = state.insert_ip(9, 1).unwrap();
        assert!(report.duplicate);
        assert_eq!(report.objective_before, report.objective_after);
    }

    #[test]
    fn insert_into_empty_state() {
        let bad = WeightedAddressSet::new(6, Role::Bad).unwrap();
        let good = WeightedAddressSet::new(6, Role::Good).unwrap();
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::All, 2, Exec::Sequential).unwrap();
        assert_eq!(state.objective(), 0);
        state.insert_ip(37, 1).unwrap();
        let sol = state.solution();
        assert_eq!(sol.filters, vec![crate::prefix::Prefix::new(37, 6, 6).unwrap()]);
    }

    #[test]
    fn remove_down_to_empty() {
        let (bad, good) = unit_sets(&[5, 6], 4);
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::All, 2, Exec::Sequential).unwrap();
        let report = state.remove_ip(5).unwrap();
        assert_eq!(report.removed_nodes, 2); // leaf and its parent
        state.remove_ip(6).unwrap();
        assert_eq!(state.objective(), 0);
        assert!(state.solution().filters.is_empty());
        assert!(state.remove_ip(6).is_err());
    }

    #[test]
    fn insert_then_remove_restores_objective_and_shape() {
        let bl = [3u32, 10, 15, 17, 22, 31, 32, 33, 57, 58];
        let (bad, good) = unit_sets(&bl, 6);
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::Some, 3, Exec::Sequential).unwrap();
        let objective = state.objective();
        let shape = state.tree().shape();
        state.insert_ip(37, 5).unwrap();
        state.remove_ip(37).unwrap();
        assert_eq!(state.objective(), objective);
        assert_eq!(state.tree().shape(), shape);
    }

    #[test]
    fn random_stream_tracks_fresh_solves() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for &kind in &[SolverKind::All, SolverKind::Some] {
            let (bad, good) = unit_sets(&[10, 20, 30, 40], 8);
            let mut state = DynamicSolver::new(bad, good, kind, 3, Exec::Sequential).unwrap();
            for _ in 0..50 {
                let present: Vec<u32> = state.blacklist().addresses().collect();
                let do_remove = !present.is_empty() && rng.gen_bool(0.4);
                if do_remove {
                    let v = present[rng.gen_range(0..present.len())];
                    let report = state.remove_ip(v).unwrap();
                    assert!(report.recomputed_node_count <= state.tree().depth() + 1);
                } else {
                    let v = rng.gen_range(0..256);
                    if !state.blacklist().contains(v) {
                        let report = state.insert_ip(v, rng.gen_range(1..=4)).unwrap();
                        assert!(report.recomputed_node_count <= state.tree().depth() + 1);
                    }
                }
                assert_eq!(state.objective(), state.fresh_objective().unwrap());
                // The edited tree stays canonical: same shape as a rebuild.
                if !state.blacklist().is_empty() {
                    let rebuilt = LcpTree::build(state.blacklist().addresses(), 8).unwrap();
                    assert_eq!(state.tree().shape(), rebuilt.shape());
                }
            }
        }
    }

    #[test]
    fn whitelist_update_tracks_fresh_solves() {
        let (bad, good) = unit_sets(&[0, 3, 4, 5, 7, 8, 10, 11, 12], 4);
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::Some, 3, Exec::Sequential).unwrap();
        state.set_good_weight(6, 50).unwrap();
        assert_eq!(state.objective(), state.fresh_objective().unwrap());
        state.set_good_weight(6, 0).unwrap();
        assert_eq!(state.objective(), state.fresh_objective().unwrap());
    }

    #[test]
    fn batch_threshold_rule() {
        let values: Vec<u32> = (0..1024u32).map(|i| i * 4096).collect();
        let bad = WeightedAddressSet::from_entries(32, Role::Bad, values.iter().map(|&v| (v, 1)))
            .unwrap();
        let good = WeightedAddressSet::new(32, Role::Good).unwrap();
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::All, 16, Exec::Sequential).unwrap();
        // 1 < 1024 / 10
        assert!(state.incremental_batch(1));
        // n ops is never below n / log2(n)
        assert!(!state.incremental_batch(1024));

        let report = state.apply_batch(&[(7, 1)], &[]).unwrap();
        assert_eq!(report.path, BatchPath::Incremental);
        let removes: Vec<u32> = values.iter().take(512).copied().collect();
        let report = state.apply_batch(&[], &removes).unwrap();
        assert_eq!(report.path, BatchPath::Rebuild);
    }

    #[test]
    fn both_batch_paths_agree() {
        let inserts = [(201u32, 1u64), (202, 2)];
        let removes = [30u32, 60]; // present in both fixture sets below
        // Small state: 4 ops >= 8/log2(8), so the batch rebuilds. Large
        // state: 4 ops < 64/6, so it goes incremental. Either way the
        // objective must match op-by-op application and a fresh solve.
        let small: Vec<u32> = vec![10, 20, 30, 40, 50, 60, 70, 80];
        let large: Vec<u32> = (1..=64u32).map(|i| i * 3).collect();
        for (values, expected_path) in
            [(small, BatchPath::Rebuild), (large, BatchPath::Incremental)]
        {
            let (bad, good) = unit_sets(&values, 8);
            let mut batched =
                DynamicSolver::new(bad.clone(), good.clone(), SolverKind::Some, 4, Exec::Sequential)
                    .unwrap();
            let report = batched.apply_batch(&inserts, &removes).unwrap();
            assert_eq!(report.path, expected_path);

            let mut stepped =
                DynamicSolver::new(bad, good, SolverKind::Some, 4, Exec::Sequential).unwrap();
            for &(v, w) in &inserts {
                stepped.insert_ip(v, w).unwrap();
            }
            for &v in &removes {
                stepped.remove_ip(v).unwrap();
            }
            assert_eq!(batched.objective(), stepped.objective());
            assert_eq!(batched.objective(), batched.fresh_objective().unwrap());
        }
    }

    #[test]
    fn conflicting_batches_error_before_mutation() {
        let (bad, good) = unit_sets(&[10, 20], 8);
        let mut state =
            DynamicSolver::new(bad, good, SolverKind::All, 2, Exec::Sequential).unwrap();
        let before = state.snapshot();
        assert!(state.apply_batch(&[(30, 1)], &[30]).is_err());
        assert!(state.apply_batch(&[(10, 1)], &[]).is_err());
        assert!(state.apply_batch(&[], &[99]).is_err());
        assert_eq!(state.snapshot(), before);
    }

    #[test]
    fn snapshot_round_trip() {
        let (bad, good) = unit_sets(&[3, 9, 12], 4);
        let state =
            DynamicSolver::new(bad, good, SolverKind::Some, 2, Exec::Sequential).unwrap();
        let text = state.snapshot();
        let restored = DynamicSolver::restore(&text, Exec::Sequential).unwrap();
        assert_eq!(restored.objective(), state.objective());
        assert_eq!(restored.solution(), state.solution());
        assert_eq!(restored.snapshot(), text);
    }
}
