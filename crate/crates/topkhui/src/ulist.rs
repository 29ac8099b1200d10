//! Vertical representation: per-itemset utility lists of (tid, iutil, rutil)
//! triples, the prefix-corrected join with optional early abandonment, and
//! the pair structures (EUCST, CUDM) used by KHMC.

use crate::core::{Database, ItemId, ItemOrder, Tid, Utility};
use crate::errors::{Error, Result};
use crate::strategies::{PairKind, SparsePairMatrix};

/// One covering transaction: the itemset's utility there and the remaining
/// utility of the items ranked after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlElement {
    pub tid: Tid,
    pub iutil: Utility,
    pub rutil: Utility,
}

/// Utility list of one itemset, canonical under the mining order, elements
/// ascending by tid, with cached element sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityList {
    pub itemset: Vec<ItemId>,
    pub sum_iutil: Utility,
    pub sum_rutil: Utility,
    pub elements: Vec<UlElement>,
}

impl UtilityList {
    pub fn new(itemset: Vec<ItemId>) -> Self {
        UtilityList {
            itemset,
            sum_iutil: 0,
            sum_rutil: 0,
            elements: Vec::new(),
        }
    }

    pub fn push(&mut self, el: UlElement) {
        debug_assert!(self.elements.last().is_none_or(|p| p.tid < el.tid));
        self.sum_iutil += el.iutil;
        self.sum_rutil += el.rutil;
        self.elements.push(el);
    }

    pub fn last_item(&self) -> ItemId {
        *self.itemset.last().expect("non-empty itemset")
    }

    pub fn tidset(&self) -> Vec<Tid> {
        self.elements.iter().map(|e| e.tid).collect()
    }

    /// Sum of the utilities of the elements with non-zero remaining utility.
    pub fn nzeu(&self) -> Utility {
        self.elements
            .iter()
            .filter(|e| e.rutil > 0)
            .map(|e| e.iutil)
            .sum()
    }

    /// The U-Prune upper bound for this subtree.
    pub fn estimate(&self) -> Utility {
        self.sum_iutil + self.sum_rutil
    }

    /// Rough heap footprint, used for the peak-memory gauge.
    pub fn approx_bytes(&self) -> u64 {
        (std::mem::size_of::<UtilityList>()
            + self.elements.len() * std::mem::size_of::<UlElement>()
            + self.itemset.len() * std::mem::size_of::<ItemId>()) as u64
    }
}

/// Builds the 1-item utility lists for every item occurring in `db`, returned
/// ascending under `order`. The database is expected to be reordered under
/// the same order (remaining utilities are computed by rank, so a stale
/// storage order changes nothing).
pub fn build_1item_ulists(db: &Database, order: &ItemOrder) -> Vec<UtilityList> {
    let mut lists: Vec<Option<UtilityList>> = (0..db.item_count()).map(|_| None).collect();
    let mut scratch: Vec<(u32, Utility)> = Vec::new();
    for t in &db.transactions {
        scratch.clear();
        scratch.extend(
            t.items
                .iter()
                .zip(&t.utils)
                .map(|(&x, &u)| (order.rank(x), u)),
        );
        scratch.sort_unstable_by_key(|&(r, _)| r);
        let mut suffix: Utility = scratch.iter().map(|&(_, u)| u).sum();
        for &(rank, util) in scratch.iter() {
            suffix -= util;
            // Ranks are a permutation; recover the item by searching the
            // transaction (short) rather than materializing an inverse map.
            let item = *t
                .items
                .iter()
                .find(|&&x| order.rank(x) == rank)
                .expect("rank came from this transaction");
            lists[item as usize]
                .get_or_insert_with(|| UtilityList::new(vec![item]))
                .push(UlElement {
                    tid: t.tid,
                    iutil: util,
                    rutil: suffix,
                });
        }
    }
    let mut out: Vec<UtilityList> = lists.into_iter().flatten().collect();
    out.sort_by_key(|ul| order.rank(ul.itemset[0]));
    out
}

/// Result of a join: the extension's list, or early abandonment when the
/// running upper bound fell below the supplied threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinOutcome {
    Joined(UtilityList),
    Abandoned,
}

/// Joins the lists of two extensions of the same prefix into the list of
/// their union; `x`'s last item must precede `y`'s under `order`.
///
/// For each shared tid the element is `(tid, iutil_x + iutil_y - iutil_R,
/// rutil_y)`, dropping the prefix term when there is no prefix. With
/// `ea_delta` set, the join abandons as soon as `x`'s total estimate minus
/// the mass of its unmatched elements falls below the threshold.
pub fn join_ulists(
    prefix: Option<&UtilityList>,
    x: &UtilityList,
    y: &UtilityList,
    order: &ItemOrder,
    ea_delta: Option<Utility>,
) -> Result<JoinOutcome> {
    if x.itemset.len() != y.itemset.len()
        || x.itemset[..x.itemset.len() - 1] != y.itemset[..y.itemset.len() - 1]
        || !order.precedes(x.last_item(), y.last_item())
    {
        return Err(Error::InvalidArgument(format!(
            "join order violation: {:?} with {:?}",
            x.itemset, y.itemset
        )));
    }
    if let Some(p) = prefix {
        debug_assert_eq!(p.itemset, x.itemset[..x.itemset.len() - 1]);
    }

    let mut itemset = x.itemset.clone();
    itemset.push(y.last_item());
    let mut joined = UtilityList::new(itemset);

    let mut remaining = x.estimate();
    let mut yi = 0usize;
    let mut pi = 0usize;
    for ex in &x.elements {
        while yi < y.elements.len() && y.elements[yi].tid < ex.tid {
            yi += 1;
        }
        if yi < y.elements.len() && y.elements[yi].tid == ex.tid {
            let ey = &y.elements[yi];
            let mut iutil = ex.iutil + ey.iutil;
            if let Some(p) = prefix {
                while p.elements[pi].tid < ex.tid {
                    pi += 1;
                }
                debug_assert_eq!(p.elements[pi].tid, ex.tid);
                iutil -= p.elements[pi].iutil;
            }
            joined.push(UlElement {
                tid: ex.tid,
                iutil,
                rutil: ey.rutil,
            });
        } else {
            remaining -= ex.iutil + ex.rutil;
            if let Some(delta) = ea_delta {
                if remaining < delta {
                    return Ok(JoinOutcome::Abandoned);
                }
            }
        }
    }
    Ok(JoinOutcome::Joined(joined))
}

/// Pair TWU map: every co-occurring pair accumulates the transaction utility.
pub fn build_eucst(db: &Database) -> SparsePairMatrix {
    let mut m = SparsePairMatrix::new(PairKind::EucstTwu);
    for t in &db.transactions {
        for i in 0..t.items.len() {
            for j in i + 1..t.items.len() {
                m.add(t.items[i], t.items[j], t.tu);
            }
        }
    }
    m
}

/// Pair utility map: every co-occurring pair accumulates its exact utility.
pub fn build_cudm(db: &Database) -> SparsePairMatrix {
    let mut m = SparsePairMatrix::new(PairKind::CudmExact);
    for t in &db.transactions {
        for i in 0..t.items.len() {
            for j in i + 1..t.items.len() {
                m.add(t.items[i], t.items[j], t.utils[i] + t.utils[j]);
            }
        }
    }
    m
}

/// Textual rendering of utility lists for diagnostics and golden tests.
pub fn dump_ulists(uls: &[UtilityList], db: &Database) -> String {
    let mut out = String::new();
    for ul in uls {
        let names: Vec<String> = ul
            .itemset
            .iter()
            .map(|&i| db.label_of(i).to_string())
            .collect();
        out.push_str(&format!(
            "{} [{} {}]:",
            names.join(" "),
            ul.sum_iutil,
            ul.sum_rutil
        ));
        for e in &ul.elements {
            out.push_str(&format!(" ({},{},{})", e.tid, e.iutil, e.rutil));
        }
        out.push('\n');
    }
    out
}
