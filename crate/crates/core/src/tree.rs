//! The longest-common-prefix (LCP) tree: a binary tree whose leaves are the
//! input addresses and whose internal nodes are exactly the pairwise longest
//! common prefixes, organized in the natural IP hierarchy.
//!
//! Every solver in this crate searches over the nodes of this tree. Nodes
//! carry the good/bad weight totals of their prefix so that objective terms
//! are O(1) lookups during the dynamic programs. The tree supports
//! incremental leaf insertion and removal: one insert adds exactly one leaf
//! and at most one internal node; one removal drops the leaf and its parent.

use std::collections::HashMap;

use crate::error::Error;
use crate::prefix::{lcp_values, Prefix};
use crate::traffic::WeightedAddressSet;
use crate::Result;

pub type NodeId = u32;

#[derive(Clone, Debug)]
pub struct LcpNode {
    prefix: Prefix,
    parent: Option<NodeId>,
    children: Option<[NodeId; 2]>,
    good_weight: u64,
    bad_weight: u64,
    leaf_count: u32,
}

impl LcpNode {
    pub fn prefix(&self) -> Prefix {
        self.prefix
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn children(&self) -> Option<[NodeId; 2]> {
        self.children
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    /// Collateral damage of filtering this prefix: summed good weight inside.
    pub fn good(&self) -> u64 {
        self.good_weight
    }

    /// Bad weight blocked by filtering this prefix.
    pub fn bad(&self) -> u64 {
        self.bad_weight
    }

    /// Total traffic of the prefix (good + bad).
    pub fn traffic(&self) -> u64 {
        self.good_weight + self.bad_weight
    }

    pub fn leaf_count(&self) -> u32 {
        self.leaf_count
    }
}

/// Sorted (address, cumulative weight) index for O(log n) range sums.
#[derive(Clone, Debug, Default)]
struct WeightIndex {
    addrs: Vec<u32>,
    cum: Vec<u64>,
}

impl WeightIndex {
    fn build(set: &WeightedAddressSet) -> Self {
        let mut addrs = Vec::with_capacity(set.len());
        let mut cum = Vec::with_capacity(set.len() + 1);
        cum.push(0);
        let mut running = 0u64;
        for (value, weight) in set.iter() {
            addrs.push(value);
            running += weight;
            cum.push(running);
        }
        WeightIndex { addrs, cum }
    }

    fn sum_range(&self, lo: u32, hi: u32) -> u64 {
        if self.addrs.is_empty() {
            return 0;
        }
        let a = self.addrs.partition_point(|&v| v < lo);
        let b = self.addrs.partition_point(|&v| v <= hi);
        self.cum[b] - self.cum[a]
    }
}

/// Outcome of one incremental insert.
#[derive(Clone, Debug)]
pub struct InsertOutcome {
    pub new_leaf: NodeId,
    pub new_internal: Option<NodeId>,
    /// Nodes whose solver tables must be recomputed, child-before-parent,
    /// ending at the root.
    pub dirty_path: Vec<NodeId>,
}

/// Outcome of one incremental removal.
#[derive(Clone, Debug)]
pub struct RemoveOutcome {
    pub removed_leaf_prefix: Prefix,
    pub removed_internal_prefix: Option<Prefix>,
    /// Nodes whose solver tables must be recomputed, child-before-parent,
    /// ending at the root. Empty when the tree became empty.
    pub dirty_path: Vec<NodeId>,
}

#[derive(Clone, Debug, Default)]
pub struct LcpTree {
    width: u8,
    nodes: Vec<Option<LcpNode>>,
    free: Vec<NodeId>,
    root: Option<NodeId>,
    leaf_of: HashMap<u32, NodeId>,
    good_index: WeightIndex,
}

impl LcpTree {
    /// An empty tree ready for incremental inserts.
    pub fn empty(width: u8) -> Result<Self> {
        crate::prefix::check_width(width)?;
        Ok(LcpTree { width, ..Default::default() })
    }

    /// Build the LCP tree of the given address values. Duplicates are
    /// deduplicated; the structure is canonical (independent of input
    /// order).
    pub fn build(values: impl IntoIterator<Item = u32>, width: u8) -> Result<Self> {
        crate::prefix::check_width(width)?;
        let mut sorted: Vec<u32> = values.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::EmptyAddressSet);
        }
        if u64::from(*sorted.last().unwrap()) >= crate::prefix::space_size(width) {
            return Err(Error::AddressOutOfRange {
                value: u64::from(*sorted.last().unwrap()),
                width,
            });
        }
        let mut tree = LcpTree {
            width,
            nodes: Vec::with_capacity(2 * sorted.len()),
            free: Vec::new(),
            root: None,
            leaf_of: HashMap::with_capacity(sorted.len()),
            good_index: WeightIndex::default(),
        };
        let root = tree.build_range(&sorted);
        tree.root = Some(root);
        Ok(tree)
    }

    /// Build over every address of one or more sets (used for the combined
    /// blacklist-plus-whitelist tree).
    pub fn build_over_sets(sets: &[&WeightedAddressSet], width: u8) -> Result<Self> {
        for set in sets {
            if set.width() != width {
                return Err(Error::WidthMismatch { expected: width, got: set.width() });
            }
        }
        LcpTree::build(sets.iter().flat_map(|s| s.addresses()), width)
    }

    fn build_range(&mut self, values: &[u32]) -> NodeId {
        if values.len() == 1 {
            return self.alloc_leaf(values[0]);
        }
        let prefix = lcp_values(values[0], *values.last().unwrap(), self.width);
        // First value landing in the upper half splits left from right.
        let split_bit = 1u32 << (self.width - prefix.len() - 1);
        let threshold = prefix.base() | split_bit;
        let mid = values.partition_point(|&v| v < threshold);
        debug_assert!(mid > 0 && mid < values.len());
        let left = self.build_range(&values[..mid]);
        let right = self.build_range(&values[mid..]);
        self.alloc_internal(prefix, left, right)
    }

    fn alloc(&mut self, node: LcpNode) -> NodeId {
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = Some(node);
            id
        } else {
            self.nodes.push(Some(node));
            (self.nodes.len() - 1) as NodeId
        }
    }

    fn alloc_leaf(&mut self, value: u32) -> NodeId {
        let prefix = Prefix::new(value, self.width, self.width).expect("host prefix");
        let id = self.alloc(LcpNode {
            prefix,
            parent: None,
            children: None,
            good_weight: 0,
            bad_weight: 0,
            leaf_count: 1,
        });
        self.leaf_of.insert(value, id);
        id
    }

    fn alloc_internal(&mut self, prefix: Prefix, left: NodeId, right: NodeId) -> NodeId {
        let leaf_count = self.node(left).leaf_count + self.node(right).leaf_count;
        let id = self.alloc(LcpNode {
            prefix,
            parent: None,
            children: Some([left, right]),
            good_weight: 0,
            bad_weight: 0,
            leaf_count,
        });
        self.node_mut(left).parent = Some(id);
        self.node_mut(right).parent = Some(id);
        id
    }

    /// Annotate every node with good/bad weight totals computed over the
    /// full sets (not just tree leaves).
    pub fn annotate(&mut self, good: &WeightedAddressSet, bad: &WeightedAddressSet) -> Result<()> {
        for set in [good, bad] {
            if set.width() != self.width {
                return Err(Error::WidthMismatch { expected: self.width, got: set.width() });
            }
        }
        self.good_index = WeightIndex::build(good);
        let bad_index = WeightIndex::build(bad);
        let ids: Vec<NodeId> = self.node_ids().collect();
        for id in ids {
            let (lo, hi) = {
                let p = self.node(id).prefix;
                (p.low(), p.high())
            };
            let g = self.good_index.sum_range(lo, hi);
            let b = bad_index.sum_range(lo, hi);
            let node = self.node_mut(id);
            node.good_weight = g;
            node.bad_weight = b;
        }
        Ok(())
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &LcpNode {
        self.nodes[id as usize].as_ref().expect("live node")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut LcpNode {
        self.nodes[id as usize].as_mut().expect("live node")
    }

    pub fn leaf_id(&self, value: u32) -> Option<NodeId> {
        self.leaf_of.get(&value).copied()
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = u32> + '_ {
        self.leaf_of.keys().copied()
    }

    /// Number of live nodes.
    pub fn len(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_of.len()
    }

    /// Upper bound (exclusive) on node ids; freed slots in range are skipped
    /// by `node_ids`.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|_| i as NodeId))
    }

    /// Node ids in post order (children before parents).
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.len());
        let Some(root) = self.root else { return order };
        // Two-phase iterative DFS to avoid recursion on deep trees.
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
            } else {
                stack.push((id, true));
                if let Some([l, r]) = self.node(id).children {
                    stack.push((r, false));
                    stack.push((l, false));
                }
            }
        }
        order
    }

    /// Maximum number of nodes on a root-to-leaf path.
    pub fn depth(&self) -> usize {
        let Some(root) = self.root else { return 0 };
        let mut max_depth = 0;
        let mut stack = vec![(root, 1usize)];
        while let Some((id, d)) = stack.pop() {
            max_depth = max_depth.max(d);
            if let Some([l, r]) = self.node(id).children {
                stack.push((l, d + 1));
                stack.push((r, d + 1));
            }
        }
        max_depth
    }

    /// Path from `id` to the root, inclusive.
    pub fn root_path(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(parent) = self.node(cur).parent {
            path.push(parent);
            cur = parent;
        }
        path
    }

    /// Preorder (prefix, is_leaf) listing; equal listings mean structurally
    /// equal trees.
    pub fn shape(&self) -> Vec<(Prefix, bool)> {
        let mut shape = Vec::with_capacity(self.len());
        let Some(root) = self.root else { return shape };
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            shape.push((node.prefix, node.is_leaf()));
            if let Some([l, r]) = node.children {
                stack.push(r);
                stack.push(l);
            }
        }
        shape
    }

    /// Insert a new bad address as a leaf. Adds exactly one leaf and at most
    /// one internal node; ancestor annotations are updated in place. The
    /// caller must ensure the address is not already a leaf.
    pub fn insert_bad_leaf(&mut self, value: u32, weight: u64) -> Result<InsertOutcome> {
        if u64::from(value) >= crate::prefix::space_size(self.width) {
            return Err(Error::AddressOutOfRange { value: u64::from(value), width: self.width });
        }
        debug_assert!(!self.leaf_of.contains_key(&value), "duplicate insert");

        let leaf_good = self.good_index.sum_range(value, value);
        let Some(root) = self.root else {
            let leaf = self.alloc_leaf(value);
            let node = self.node_mut(leaf);
            node.bad_weight = weight;
            node.good_weight = leaf_good;
            self.root = Some(leaf);
            return Ok(InsertOutcome { new_leaf: leaf, new_internal: None, dirty_path: vec![leaf] });
        };

        // Find the edge to split: descend while some child's prefix still
        // contains the value.
        let mut attach = root;
        loop {
            let node = self.node(attach);
            if !node.prefix.contains_value(value) {
                break;
            }
            match node.children {
                None => unreachable!("leaf prefix would equal an existing address"),
                Some([l, r]) => {
                    if self.node(l).prefix.contains_value(value) {
                        attach = l;
                    } else if self.node(r).prefix.contains_value(value) {
                        attach = r;
                    } else {
                        // Value sits in a gap between the children: split the
                        // edge to whichever child shares more leading bits.
                        let ll = lcp_values(value, self.node(l).prefix.base(), self.width).len();
                        let rl = lcp_values(value, self.node(r).prefix.base(), self.width).len();
                        attach = if ll >= rl { l } else { r };
                        break;
                    }
                }
            }
        }

        // New internal node: LCP of the value and the subtree being displaced.
        let attach_prefix = self.node(attach).prefix;
        let join = lcp_values(value, attach_prefix.base(), self.width);
        debug_assert!(join.len() < attach_prefix.len());
        let old_parent = self.node(attach).parent;

        let leaf = self.alloc_leaf(value);
        {
            let node = self.node_mut(leaf);
            node.bad_weight = weight;
            node.good_weight = leaf_good;
        }
        let value_right = value > attach_prefix.base();
        let children = if value_right { [attach, leaf] } else { [leaf, attach] };
        let internal = self.alloc_internal(join, children[0], children[1]);
        {
            let (lo, hi) = (join.low(), join.high());
            let g = self.good_index.sum_range(lo, hi);
            let node = self.node_mut(internal);
            node.parent = old_parent;
            node.good_weight = g;
        }
        // The new internal node's bad weight and leaf count start from the
        // displaced subtree; the ancestor walk below adds the new leaf.
        {
            let (b, lc) = {
                let a = self.node(attach);
                (a.bad_weight, a.leaf_count)
            };
            let node = self.node_mut(internal);
            node.bad_weight = b;
            node.leaf_count = lc;
        }
        match old_parent {
            None => self.root = Some(internal),
            Some(p) => {
                let slots = self.node_mut(p).children.as_mut().expect("internal parent");
                let slot = slots.iter_mut().find(|s| **s == attach).expect("child link");
                *slot = internal;
            }
        }

        // Update counts/weights from the new internal node up to the root.
        let mut cur = Some(internal);
        while let Some(id) = cur {
            let node = self.node_mut(id);
            node.bad_weight += weight;
            node.leaf_count += 1;
            cur = node.parent;
        }

        let mut dirty_path = vec![leaf];
        dirty_path.extend(self.root_path(internal));
        Ok(InsertOutcome { new_leaf: leaf, new_internal: Some(internal), dirty_path })
    }

    /// Remove a leaf address; its parent node is removed too (it stops being
    /// a longest common prefix) and the sibling takes the parent's place.
    pub fn remove_leaf(&mut self, value: u32) -> Result<RemoveOutcome> {
        let leaf = self
            .leaf_of
            .remove(&value)
            .ok_or(Error::AddressNotFound(u64::from(value)))?;
        let leaf_prefix = self.node(leaf).prefix;
        let weight = self.node(leaf).bad_weight;

        let Some(parent) = self.node(leaf).parent else {
            // Last address: the tree becomes empty.
            self.nodes[leaf as usize] = None;
            self.free.push(leaf);
            self.root = None;
            return Ok(RemoveOutcome {
                removed_leaf_prefix: leaf_prefix,
                removed_internal_prefix: None,
                dirty_path: Vec::new(),
            });
        };

        let [l, r] = self.node(parent).children.expect("parent is internal");
        let sibling = if l == leaf { r } else { l };
        let parent_prefix = self.node(parent).prefix;
        let grandparent = self.node(parent).parent;

        self.node_mut(sibling).parent = grandparent;
        match grandparent {
            None => self.root = Some(sibling),
            Some(gp) => {
                let slots = self.node_mut(gp).children.as_mut().expect("internal grandparent");
                let slot = slots.iter_mut().find(|s| **s == parent).expect("child link");
                *slot = sibling;
            }
        }
        self.nodes[leaf as usize] = None;
        self.free.push(leaf);
        self.nodes[parent as usize] = None;
        self.free.push(parent);

        let mut cur = grandparent;
        while let Some(id) = cur {
            let node = self.node_mut(id);
            node.bad_weight -= weight;
            node.leaf_count -= 1;
            cur = node.parent;
        }

        let dirty_path = match grandparent {
            Some(gp) => self.root_path(gp),
            None => vec![sibling],
        };
        Ok(RemoveOutcome {
            removed_leaf_prefix: leaf_prefix,
            removed_internal_prefix: Some(parent_prefix),
            dirty_path,
        })
    }

    /// Re-annotate good weights after a whitelist change. Returns the nodes
    /// whose `good` changed (the containment path of the address), deepest
    /// first.
    pub fn refresh_good(&mut self, good: &WeightedAddressSet, changed: u32) -> Result<Vec<NodeId>> {
        if good.width() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: good.width() });
        }
        self.good_index = WeightIndex::build(good);
        let mut path = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            let node = self.node(id);
            if !node.prefix.contains_value(changed) {
                break;
            }
            path.push(id);
            cur = match node.children {
                Some([l, r]) => {
                    if self.node(l).prefix.contains_value(changed) {
                        Some(l)
                    } else if self.node(r).prefix.contains_value(changed) {
                        Some(r)
                    } else {
                        None
                    }
                }
                None => None,
            };
        }
        for &id in &path {
            let (lo, hi) = {
                let p = self.node(id).prefix;
                (p.low(), p.high())
            };
            let g = self.good_index.sum_range(lo, hi);
            self.node_mut(id).good_weight = g;
        }
        path.reverse();
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::Role;

    /// The 4-bit example blacklist used throughout the crate's tests.
    pub(crate) const BL4: [u32; 9] = [0, 3, 4, 5, 7, 8, 10, 11, 12];

    fn unit_good_complement(bl: &[u32], width: u8) -> WeightedAddressSet {
        let space = crate::prefix::space_size(width);
        let entries = (0..space as u32).filter(|v| !bl.contains(v)).map(|v| (v, 1));
        WeightedAddressSet::from_entries(width, Role::Good, entries).unwrap()
    }

    #[test]
    fn four_bit_tree_has_canonical_counts() {
        let tree = LcpTree::build(BL4, 4).unwrap();
        assert_eq!(tree.leaf_count(), 9);
        assert_eq!(tree.len(), 17); // 9 leaves + 8 internal
        let root = tree.root().unwrap();
        assert_eq!(tree.node(root).leaf_count(), 9);
    }

    #[test]
    fn single_address_tree_is_one_leaf() {
        let tree = LcpTree::build([9], 4).unwrap();
        let root = tree.root().unwrap();
        assert!(tree.node(root).is_leaf());
        assert_eq!(tree.node(root).prefix(), Prefix::new(9, 4, 4).unwrap());
    }

    #[test]
    fn build_is_order_invariant() {
        let tree_a = LcpTree::build(BL4, 4).unwrap();
        let mut rev = BL4.to_vec();
        rev.reverse();
        let tree_b = LcpTree::build(rev, 4).unwrap();
        assert_eq!(tree_a.shape(), tree_b.shape());
    }

    #[test]
    fn annotation_counts_gap_addresses() {
        let mut tree = LcpTree::build(BL4, 4).unwrap();
        let good = unit_good_complement(&BL4, 4);
        let bad = WeightedAddressSet::from_entries(4, Role::Bad, BL4.map(|v| (v, 1))).unwrap();
        tree.annotate(&good, &bad).unwrap();

        // Node 00** covers good addresses 1 and 2.
        let leaf0 = tree.leaf_id(0).unwrap();
        let n00 = tree.node(leaf0).parent().unwrap();
        assert_eq!(tree.node(n00).prefix(), Prefix::new(0, 2, 4).unwrap());
        assert_eq!(tree.node(n00).good(), 2);
        assert_eq!(tree.node(n00).bad(), 2);

        // Root covers the whole space: all 7 goods, all 9 bads.
        let root = tree.root().unwrap();
        assert_eq!(tree.node(root).good(), 7);
        assert_eq!(tree.node(root).bad(), 9);
    }

    #[test]
    fn annotation_with_weighted_good() {
        // good = {6} with weight 5; the node covering bad {4,5,7} is 01**.
        let mut tree = LcpTree::build([4u32, 5, 7], 4).unwrap();
        let good = WeightedAddressSet::from_entries(4, Role::Good, [(6, 5)]).unwrap();
        let bad =
            WeightedAddressSet::from_entries(4, Role::Bad, [(4, 1), (5, 1), (7, 1)]).unwrap();
        tree.annotate(&good, &bad).unwrap();
        let root = tree.root().unwrap();
        assert_eq!(tree.node(root).prefix(), Prefix::new(4, 2, 4).unwrap());
        assert_eq!(tree.node(root).good(), 5);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(LcpTree::build([], 4).unwrap_err(), Error::EmptyAddressSet);
    }

    #[test]
    fn duplicates_are_deduplicated() {
        let tree = LcpTree::build([3u32, 3, 3, 7], 4).unwrap();
        assert_eq!(tree.leaf_count(), 2);
    }

    #[test]
    fn six_bit_insert_creates_exactly_one_internal_node() {
        // Blacklist from the 6-bit running example; inserting 37 must create
        // exactly the node 100*** above the {32,33} subtree.
        let bl = [3u32, 10, 15, 17, 22, 31, 32, 33, 57, 58];
        let mut tree = LcpTree::build(bl, 6).unwrap();
        let good = WeightedAddressSet::new(6, Role::Good).unwrap();
        let bad = WeightedAddressSet::from_entries(6, Role::Bad, bl.map(|v| (v, 1))).unwrap();
        tree.annotate(&good, &bad).unwrap();

        let before = tree.len();
        let outcome = tree.insert_bad_leaf(37, 1).unwrap();
        assert_eq!(tree.len(), before + 2); // one leaf + one internal
        let internal = outcome.new_internal.unwrap();
        assert_eq!(tree.node(internal).prefix(), Prefix::new(32, 3, 6).unwrap());
        assert_eq!(tree.node(internal).leaf_count(), 3);
        // Dirty path runs from the new leaf to the root.
        assert_eq!(outcome.dirty_path.first().copied(), Some(outcome.new_leaf));
        assert_eq!(outcome.dirty_path.last().copied(), tree.root());
    }

    #[test]
    fn insert_then_remove_restores_shape() {
        let bl = [3u32, 10, 15, 17, 22, 31, 32, 33, 57, 58];
        let mut tree = LcpTree::build(bl, 6).unwrap();
        let shape_before = tree.shape();
        tree.insert_bad_leaf(37, 1).unwrap();
        tree.remove_leaf(37).unwrap();
        assert_eq!(tree.shape(), shape_before);
    }

    #[test]
    fn remove_drops_leaf_and_parent() {
        let mut tree = LcpTree::build([0u32, 1, 8], 4).unwrap();
        assert_eq!(tree.len(), 5);
        let outcome = tree.remove_leaf(1).unwrap();
        assert_eq!(tree.len(), 3);
        assert!(outcome.removed_internal_prefix.is_some());

        // Removing down to one node, then to empty.
        tree.remove_leaf(0).unwrap();
        let outcome = tree.remove_leaf(8).unwrap();
        assert!(tree.is_empty());
        assert!(outcome.removed_internal_prefix.is_none());
    }

    #[test]
    fn insert_into_empty_tree() {
        let mut tree = LcpTree {
            width: 4,
            ..Default::default()
        };
        let outcome = tree.insert_bad_leaf(5, 2).unwrap();
        assert_eq!(outcome.new_internal, None);
        let root = tree.root().unwrap();
        assert!(tree.node(root).is_leaf());
        assert_eq!(tree.node(root).bad(), 2);
    }

    #[test]
    fn structural_invariants_hold_after_random_edits() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        for _ in 0..50 {
            let width = rng.gen_range(4..=10u8);
            let space = crate::prefix::space_size(width);
            let n = rng.gen_range(1..=space.min(40)) as usize;
            let mut values: Vec<u32> = (0..space as u32).collect();
            for i in 0..values.len() {
                let j = rng.gen_range(0..values.len());
                values.swap(i, j);
            }
            values.truncate(n);
            let mut tree = LcpTree::build(values.iter().copied(), width).unwrap();
            let bad = WeightedAddressSet::from_entries(
                width,
                Role::Bad,
                values.iter().map(|&v| (v, 1)),
            )
            .unwrap();
            let good = WeightedAddressSet::new(width, Role::Good).unwrap();
            tree.annotate(&good, &bad).unwrap();
            check_invariants(&tree);
        }
    }

    pub(crate) fn check_invariants(tree: &LcpTree) {
        assert_eq!(tree.len(), 2 * tree.leaf_count() - 1);
        for id in tree.node_ids() {
            let node = tree.node(id);
            if let Some([l, r]) = node.children() {
                let (ln, rn) = (tree.node(l), tree.node(r));
                assert!(node.prefix().covers(&ln.prefix()) && node.prefix().len() < ln.prefix().len());
                assert!(node.prefix().covers(&rn.prefix()) && node.prefix().len() < rn.prefix().len());
                assert_eq!(node.leaf_count(), ln.leaf_count() + rn.leaf_count());
                assert_eq!(node.bad(), ln.bad() + rn.bad(), "bad weight is additive");
                assert!(node.good() >= ln.good() + rn.good(), "good weight is superadditive");
                assert!(ln.prefix().high() < rn.prefix().low(), "children are ordered");
                // The parent really is the longest common prefix.
                let joined = lcp_values(ln.prefix().base(), rn.prefix().base(), tree.width());
                assert_eq!(joined.len(), node.prefix().len());
            } else {
                assert!(node.prefix().is_host());
                assert_eq!(node.leaf_count(), 1);
            }
        }
    }
}
