//! Transaction database model and the scalar utility computations every
//! strategy and miner builds on: per-transaction utility, itemset utility,
//! remaining utility, per-item statistics (TWU, total utility, support,
//! min/max item utility) and item orderings.

use std::collections::HashMap;

use crate::errors::{Error, Result};

/// Dense item index assigned at ingest, in first-seen order.
pub type ItemId = u32;
/// 1-based transaction sequence number.
pub type Tid = u32;
/// Money units. External profit times internal quantity, pre-multiplied at
/// ingest. Exact 64-bit integer arithmetic keeps golden values bit-stable;
/// fractional profits must be scaled before ingest.
pub type Utility = i64;

/// One transaction: parallel item/utility vectors in the order the source
/// listed them, plus the cached transaction utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tid: Tid,
    pub items: Vec<ItemId>,
    pub utils: Vec<Utility>,
    /// Cached sum of `utils`.
    pub tu: Utility,
}

impl Transaction {
    pub fn new(tid: Tid, items: Vec<ItemId>, utils: Vec<Utility>) -> Self {
        debug_assert_eq!(items.len(), utils.len());
        let tu = utils.iter().sum();
        Transaction {
            tid,
            items,
            utils,
            tu,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.contains(&item)
    }

    /// Utility of `item` in this transaction, or `None` when absent.
    pub fn utility_of(&self, item: ItemId) -> Option<Utility> {
        self.items
            .iter()
            .position(|&x| x == item)
            .map(|i| self.utils[i])
    }

    /// Whether every item of `set` occurs in this transaction.
    pub fn contains_all(&self, set: &[ItemId]) -> bool {
        set.iter().all(|&x| self.contains(x))
    }
}

/// Sum of the item utilities of a transaction.
pub fn transaction_utility(t: &Transaction) -> Utility {
    t.utils.iter().sum()
}

/// A transaction database with a bijective map between dense item ids and the
/// original integer labels of the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    pub transactions: Vec<Transaction>,
    labels: Vec<u64>,
    index: HashMap<u64, ItemId>,
}

impl Database {
    /// Builds a database from `(labels, utils)` rows, assigning dense ids in
    /// first-seen order and numbering tids from 1 in input order.
    pub fn from_label_rows(rows: &[(Vec<u64>, Vec<Utility>)]) -> Result<Self> {
        let mut db = Database {
            transactions: Vec::with_capacity(rows.len()),
            labels: Vec::new(),
            index: HashMap::new(),
        };
        for (n, (labels, utils)) in rows.iter().enumerate() {
            let line = n + 1;
            if labels.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty transaction".into(),
                });
            }
            if labels.len() != utils.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("{} items but {} utilities", labels.len(), utils.len()),
                });
            }
            let mut items = Vec::with_capacity(labels.len());
            for (&label, &u) in labels.iter().zip(utils) {
                if u < 1 {
                    return Err(Error::Parse {
                        line,
                        msg: format!("item {label} has non-positive utility {u}"),
                    });
                }
                let id = db.intern(label);
                if items.contains(&id) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("duplicate item {label}"),
                    });
                }
                items.push(id);
            }
            db.transactions
                .push(Transaction::new(line as Tid, items, utils.clone()));
        }
        Ok(db)
    }

    fn intern(&mut self, label: u64) -> ItemId {
        if let Some(&id) = self.index.get(&label) {
            return id;
        }
        let id = self.labels.len() as ItemId;
        self.labels.push(label);
        self.index.insert(label, id);
        id
    }

    /// Number of distinct items ever seen (the id space size).
    pub fn item_count(&self) -> usize {
        self.labels.len()
    }

    pub fn transaction_count(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn label_of(&self, id: ItemId) -> u64 {
        self.labels[id as usize]
    }

    pub fn id_of_label(&self, label: u64) -> Option<ItemId> {
        self.index.get(&label).copied()
    }

    /// Maps external labels to ids, erroring on labels never seen at ingest.
    pub fn ids_of_labels(&self, labels: &[u64]) -> Result<Vec<ItemId>> {
        labels
            .iter()
            .map(|&l| self.id_of_label(l).ok_or(Error::UnknownLabel(l)))
            .collect()
    }

    /// Original labels of `items`, sorted ascending. This is the canonical
    /// reporting key for an itemset.
    pub fn label_key(&self, items: &[ItemId]) -> Vec<u64> {
        let mut labels: Vec<u64> = items.iter().map(|&i| self.label_of(i)).collect();
        labels.sort_unstable();
        labels
    }

    fn check_items(&self, set: &[ItemId]) -> Result<()> {
        for &x in set {
            if (x as usize) >= self.item_count() {
                return Err(Error::UnknownItem(x));
            }
        }
        Ok(())
    }

    /// Total utility of `set` over all transactions containing it; 0 when
    /// nothing covers it. The empty itemset has utility 0 by the empty-sum
    /// convention.
    pub fn itemset_utility(&self, set: &[ItemId]) -> Result<Utility> {
        self.check_items(set)?;
        let mut total = 0;
        for t in &self.transactions {
            if let Some(u) = itemset_utility_in(t, set) {
                total += u;
            }
        }
        Ok(total)
    }

    /// Per-transaction tidset of `set` (1-based tids, ascending).
    pub fn cover(&self, set: &[ItemId]) -> Result<Vec<Tid>> {
        self.check_items(set)?;
        Ok(self
            .transactions
            .iter()
            .filter(|t| t.contains_all(set))
            .map(|t| t.tid)
            .collect())
    }
}

/// Utility of `set` within one transaction, or `None` when the transaction
/// does not contain every item of `set`.
pub fn itemset_utility_in(t: &Transaction, set: &[ItemId]) -> Option<Utility> {
    let mut sum = 0;
    for &x in set {
        sum += t.utility_of(x)?;
    }
    Some(sum)
}

/// A total order over the item id space, held as a rank per item.
#[derive(Debug, Clone)]
pub struct ItemOrder {
    rank: Vec<u32>,
}

impl ItemOrder {
    /// Identity order: ascending dense id.
    pub fn identity(item_count: usize) -> Self {
        ItemOrder {
            rank: (0..item_count as u32).collect(),
        }
    }

    /// Ascending original label order.
    pub fn by_label(db: &Database) -> Self {
        let mut ids: Vec<ItemId> = (0..db.item_count() as ItemId).collect();
        ids.sort_by_key(|&i| db.label_of(i));
        Self::from_sequence(&ids)
    }

    /// Builds an order from a full permutation of the id space, first = least.
    pub fn from_sequence(ids: &[ItemId]) -> Self {
        let mut rank = vec![0u32; ids.len()];
        for (pos, &id) in ids.iter().enumerate() {
            rank[id as usize] = pos as u32;
        }
        ItemOrder { rank }
    }

    pub fn rank(&self, item: ItemId) -> u32 {
        self.rank[item as usize]
    }

    pub fn precedes(&self, a: ItemId, b: ItemId) -> bool {
        self.rank(a) < self.rank(b)
    }

    pub fn sort(&self, items: &mut [ItemId]) {
        items.sort_by_key(|&i| self.rank(i));
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Lexicographic comparison of two itemsets by rank sequence.
    pub fn cmp_itemsets(&self, a: &[ItemId], b: &[ItemId]) -> std::cmp::Ordering {
        let ra = a.iter().map(|&i| self.rank(i));
        let rb = b.iter().map(|&i| self.rank(i));
        ra.cmp(rb)
    }
}

/// Per-item first-scan statistics, indexed by dense id.
#[derive(Debug, Clone)]
pub struct ItemStats {
    twu: Vec<Utility>,
    riu: Vec<Utility>,
    support: Vec<u32>,
    miu: Vec<Utility>,
    mau: Vec<Utility>,
}

impl ItemStats {
    pub fn item_count(&self) -> usize {
        self.twu.len()
    }

    /// Transaction weighted utility: sum of TU over covering transactions.
    pub fn twu(&self, item: ItemId) -> Utility {
        self.twu[item as usize]
    }

    /// Real item utility: total utility of the 1-itemset.
    pub fn riu(&self, item: ItemId) -> Utility {
        self.riu[item as usize]
    }

    pub fn support(&self, item: ItemId) -> u32 {
        self.support[item as usize]
    }

    /// Minimum per-transaction utility among covering transactions.
    pub fn miu(&self, item: ItemId) -> Utility {
        self.miu[item as usize]
    }

    /// Maximum per-transaction utility among covering transactions.
    pub fn mau(&self, item: ItemId) -> Utility {
        self.mau[item as usize]
    }

    pub fn riu_values(&self) -> impl Iterator<Item = Utility> + '_ {
        self.riu.iter().copied()
    }
}

/// One database scan computing TWU, total utility, support and min/max item
/// utility for every item.
pub fn compute_item_stats(db: &Database) -> ItemStats {
    let n = db.item_count();
    let mut stats = ItemStats {
        twu: vec![0; n],
        riu: vec![0; n],
        support: vec![0; n],
        miu: vec![Utility::MAX; n],
        mau: vec![0; n],
    };
    for t in &db.transactions {
        for (&item, &u) in t.items.iter().zip(&t.utils) {
            let i = item as usize;
            stats.twu[i] += t.tu;
            stats.riu[i] += u;
            stats.support[i] += 1;
            stats.miu[i] = stats.miu[i].min(u);
            stats.mau[i] = stats.mau[i].max(u);
        }
    }
    for i in 0..n {
        if stats.support[i] == 0 {
            stats.miu[i] = 0;
        }
    }
    stats
}

/// Lower bound on the utility of an itemset: sum of member mius scaled by the
/// itemset support.
pub fn itemset_miu(stats: &ItemStats, set: &[ItemId], support: u32) -> Utility {
    let sum: Utility = set.iter().map(|&x| stats.miu(x)).sum();
    sum * support as Utility
}

/// Upper bound dual of [`itemset_miu`].
pub fn itemset_mau(stats: &ItemStats, set: &[ItemId], support: u32) -> Utility {
    let sum: Utility = set.iter().map(|&x| stats.mau(x)).sum();
    sum * support as Utility
}

/// The mining order: ascending TWU, ties broken by ascending dense id.
pub fn twu_order(stats: &ItemStats) -> ItemOrder {
    let mut ids: Vec<ItemId> = (0..stats.item_count() as ItemId).collect();
    ids.sort_by_key(|&i| (stats.twu(i), i));
    ItemOrder::from_sequence(&ids)
}

/// Remaining utility of `set` in one transaction under `order`: the utilities
/// of the transaction's items ranked strictly after the last item of `set`.
/// `None` when the transaction does not contain `set`.
pub fn remaining_utility_in(t: &Transaction, set: &[ItemId], order: &ItemOrder) -> Option<Utility> {
    if !t.contains_all(set) {
        return None;
    }
    let max_rank = set.iter().map(|&x| order.rank(x)).max()?;
    Some(
        t.items
            .iter()
            .zip(&t.utils)
            .filter(|(&x, _)| order.rank(x) > max_rank)
            .map(|(_, &u)| u)
            .sum(),
    )
}

/// Remaining utility of `set` over the whole database under `order`.
pub fn remaining_utility(db: &Database, set: &[ItemId], order: &ItemOrder) -> Result<Utility> {
    db.check_items(set)?;
    Ok(db
        .transactions
        .iter()
        .filter_map(|t| remaining_utility_in(t, set, order))
        .sum())
}

/// Discards globally unpromising items: every item with `TWU < delta` is
/// removed from every transaction, transaction utilities are recomputed over
/// the survivors, empty transactions are dropped and tids renumbered from 1.
/// A single pass by design; TWU values are not recomputed afterwards.
pub fn apply_dgu(db: &Database, stats: &ItemStats, delta: Utility) -> Database {
    let mut out = Database {
        transactions: Vec::with_capacity(db.transactions.len()),
        labels: db.labels.clone(),
        index: db.index.clone(),
    };
    for t in &db.transactions {
        let mut items = Vec::with_capacity(t.items.len());
        let mut utils = Vec::with_capacity(t.utils.len());
        for (&item, &u) in t.items.iter().zip(&t.utils) {
            if stats.twu(item) >= delta {
                items.push(item);
                utils.push(u);
            }
        }
        if !items.is_empty() {
            let tid = out.transactions.len() as Tid + 1;
            out.transactions.push(Transaction::new(tid, items, utils));
        }
    }
    out
}

/// Permutes every transaction's item/utility pairs to ascend under `order`.
pub fn reorder_database(db: &Database, order: &ItemOrder) -> Database {
    let mut out = db.clone();
    for t in &mut out.transactions {
        let mut pairs: Vec<(ItemId, Utility)> = t
            .items
            .iter()
            .copied()
            .zip(t.utils.iter().copied())
            .collect();
        pairs.sort_by_key(|&(i, _)| order.rank(i));
        for (k, (item, u)) in pairs.into_iter().enumerate() {
            t.items[k] = item;
            t.utils[k] = u;
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::ingest::parse_dataset;

    pub const SAMPLE: &str = include_str!("../../../data/sample.txt");

    /// The worked-example database; labels 1..=7 stand for items a..g.
    pub fn sample_db() -> Database {
        parse_dataset(SAMPLE.as_bytes()).unwrap()
    }

    /// Per-unit profits of items a..g, indexed by dense id.
    pub fn sample_profits(db: &Database) -> Vec<Utility> {
        let per_label = [5, 2, 1, 2, 3, 1, 1]; // a..g
        let mut out = vec![0; db.item_count()];
        for (off, &p) in per_label.iter().enumerate() {
            let id = db.id_of_label(off as u64 + 1).unwrap();
            out[id as usize] = p;
        }
        out
    }

    pub fn ids(db: &Database, labels: &[u64]) -> Vec<ItemId> {
        db.ids_of_labels(labels).unwrap()
    }

    /// Labels helper: a..g as 1..=7.
    pub fn l(names: &str) -> Vec<u64> {
        names
            .chars()
            .map(|c| (c as u64) - ('a' as u64) + 1)
            .collect()
    }
}
