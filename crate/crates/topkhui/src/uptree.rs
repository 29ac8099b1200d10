//! UP-Tree construction (prefix tree plus header table, items in descending
//! TWU order) and the value collections behind the tree-based NU and MD
//! threshold raises.

use std::collections::BTreeMap;

use crate::core::{Database, ItemId, ItemStats, Utility};

#[derive(Debug, Clone)]
pub struct UpNode {
    pub item: ItemId,
    pub support: u64,
    /// Accumulated utility of the root-to-here path items, summed over every
    /// transaction threaded through this node.
    pub node_utility: Utility,
    children: Vec<(ItemId, usize)>,
    next_link: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct HeaderEntry {
    pub item: ItemId,
    pub twu: Utility,
    head: Option<usize>,
}

/// Prefix tree over transactions re-sorted in TWU-descending order, with a
/// header table linking all nodes of each item.
#[derive(Debug, Clone)]
pub struct UpTree {
    nodes: Vec<UpNode>,
    root_children: Vec<(ItemId, usize)>,
    pub header: Vec<HeaderEntry>,
}

impl UpTree {
    /// Builds the tree. Items with `TWU < delta` are filtered out first (the
    /// DGU property); each surviving transaction is inserted root-down in
    /// TWU-descending item order (ties broken by ascending id), incrementing
    /// the support of every visited node and adding the transaction's utility
    /// of the path prefix to its node utility.
    pub fn build(db: &Database, stats: &ItemStats, delta: Utility) -> UpTree {
        let mut header_items: Vec<ItemId> = (0..db.item_count() as ItemId)
            .filter(|&i| stats.twu(i) >= delta)
            .collect();
        header_items.sort_by_key(|&i| (std::cmp::Reverse(stats.twu(i)), i));
        let mut position = vec![usize::MAX; db.item_count()];
        for (pos, &item) in header_items.iter().enumerate() {
            position[item as usize] = pos;
        }

        let mut tree = UpTree {
            nodes: Vec::new(),
            root_children: Vec::new(),
            header: header_items
                .iter()
                .map(|&item| HeaderEntry {
                    item,
                    twu: stats.twu(item),
                    head: None,
                })
                .collect(),
        };
        let mut tails: Vec<Option<usize>> = vec![None; tree.header.len()];

        for t in &db.transactions {
            let mut pairs: Vec<(ItemId, Utility)> = t
                .items
                .iter()
                .zip(&t.utils)
                .filter(|(&x, _)| position[x as usize] != usize::MAX)
                .map(|(&x, &u)| (x, u))
                .collect();
            pairs.sort_by_key(|&(x, _)| position[x as usize]);

            let mut at_root = true;
            let mut current = 0usize;
            let mut prefix_utility = 0;
            for (item, util) in pairs {
                prefix_utility += util;
                let siblings = if at_root {
                    &tree.root_children
                } else {
                    &tree.nodes[current].children
                };
                let existing = siblings
                    .iter()
                    .find(|(x, _)| *x == item)
                    .map(|&(_, idx)| idx);
                let next = match existing {
                    Some(idx) => idx,
                    None => {
                        let idx = tree.nodes.len();
                        tree.nodes.push(UpNode {
                            item,
                            support: 0,
                            node_utility: 0,
                            children: Vec::new(),
                            next_link: None,
                        });
                        if at_root {
                            tree.root_children.push((item, idx));
                        } else {
                            tree.nodes[current].children.push((item, idx));
                        }
                        let hpos = position[item as usize];
                        match tails[hpos] {
                            Some(tail) => tree.nodes[tail].next_link = Some(idx),
                            None => tree.header[hpos].head = Some(idx),
                        }
                        tails[hpos] = Some(idx);
                        idx
                    }
                };
                tree.nodes[next].support += 1;
                tree.nodes[next].node_utility += prefix_utility;
                at_root = false;
                current = next;
            }
        }
        tree
    }

    /// Number of nodes excluding the item-less root.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_children(&self) -> impl Iterator<Item = &UpNode> {
        self.root_children.iter().map(|&(_, idx)| &self.nodes[idx])
    }

    pub fn root_child(&self, item: ItemId) -> Option<&UpNode> {
        self.root_children
            .iter()
            .find(|(x, _)| *x == item)
            .map(|&(_, idx)| &self.nodes[idx])
    }

    /// Total support of `item` across its header chain.
    pub fn item_support(&self, item: ItemId) -> u64 {
        let Some(entry) = self.header.iter().find(|h| h.item == item) else {
            return 0;
        };
        let mut total = 0;
        let mut cursor = entry.head;
        while let Some(idx) = cursor {
            total += self.nodes[idx].support;
            cursor = self.nodes[idx].next_link;
        }
        total
    }

    /// Node utility of every non-root node, the NU strategy's value pool.
    pub fn node_utility_values(&self) -> Vec<Utility> {
        self.nodes.iter().map(|n| n.node_utility).collect()
    }

    /// The MD strategy's value pool: for each immediate child `a` of the root
    /// and each distinct item `b` in the subtree strictly below it,
    /// `(miu(a) + miu(b)) * sup` where `sup` totals the b-node supports in
    /// that subtree.
    pub fn md_pair_values(&self, stats: &ItemStats) -> Vec<Utility> {
        let mut values = Vec::new();
        for &(a, idx) in &self.root_children {
            let mut support_by_item: BTreeMap<ItemId, u64> = BTreeMap::new();
            self.collect_descendants(idx, &mut support_by_item);
            for (b, sup) in support_by_item {
                values.push((stats.miu(a) + stats.miu(b)) * sup as Utility);
            }
        }
        values
    }

    fn collect_descendants(&self, idx: usize, acc: &mut BTreeMap<ItemId, u64>) {
        for &(item, child) in &self.nodes[idx].children {
            *acc.entry(item).or_insert(0) += self.nodes[child].support;
            self.collect_descendants(child, acc);
        }
    }

    /// Indented text rendering for diagnostics and golden tests. Children
    /// appear in insertion order; labels come from `db`.
    pub fn dump(&self, db: &Database) -> String {
        let mut out = String::new();
        for &(_, idx) in &self.root_children {
            self.dump_node(idx, 0, db, &mut out);
        }
        out
    }

    fn dump_node(&self, idx: usize, depth: usize, db: &Database, out: &mut String) {
        let n = &self.nodes[idx];
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!(
            "{} ({}, {})\n",
            db.label_of(n.item),
            n.support,
            n.node_utility
        ));
        for &(_, child) in &n.children {
            self.dump_node(child, depth + 1, db, out);
        }
    }
}
