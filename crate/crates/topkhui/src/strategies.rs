//! Threshold-raising machinery: the first-scan pair matrices (PE, PMUD, RSD),
//! the real-item-utility raise, the generic Kth-highest raiser shared by the
//! NU/MD/MC/SE/SEP-style strategies, the co-occurrence (CUD) and coverage
//! (COV) raises, and the bounded candidate heap behind RUC.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use itertools::Itertools;

use crate::core::{Database, ItemId, ItemStats, Tid, Utility};
use crate::errors::{Error, Result};

/// What a pair matrix's entries mean, and therefore what may be asserted
/// about them: the PE and PMUD kinds are lower bounds on the true pair
/// utility, RSD and CUDM hold exact pair utilities, EUCST holds pair TWU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    PeLowerBound,
    PmudLowerBound,
    RsdExact,
    EucstTwu,
    CudmExact,
}

/// Associative map from an unordered item pair to an accumulated utility.
/// Keys are stored with the smaller id first; absent pairs read as 0.
#[derive(Debug, Clone)]
pub struct SparsePairMatrix {
    kind: PairKind,
    entries: HashMap<(ItemId, ItemId), Utility>,
}

impl SparsePairMatrix {
    pub fn new(kind: PairKind) -> Self {
        SparsePairMatrix {
            kind,
            entries: HashMap::new(),
        }
    }

    fn key(p: ItemId, q: ItemId) -> (ItemId, ItemId) {
        debug_assert_ne!(p, q);
        if p < q {
            (p, q)
        } else {
            (q, p)
        }
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn add(&mut self, p: ItemId, q: ItemId, v: Utility) {
        *self.entries.entry(Self::key(p, q)).or_insert(0) += v;
    }

    pub fn get(&self, p: ItemId, q: ItemId) -> Utility {
        self.entries.get(&Self::key(p, q)).copied().unwrap_or(0)
    }

    pub fn contains(&self, p: ItemId, q: ItemId) -> bool {
        self.entries.contains_key(&Self::key(p, q))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = Utility> + '_ {
        self.entries.values().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((ItemId, ItemId), Utility)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

/// One step of the threshold audit trail.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct AuditEntry {
    pub strategy: &'static str,
    pub old: Utility,
    pub new: Utility,
}

/// The running minimum-utility threshold plus the ordered log of every
/// strategy application. Raises are monotone; a strategy that cannot beat the
/// current value still logs a no-op entry.
#[derive(Debug, Clone)]
pub struct ThresholdState {
    pub delta: Utility,
    pub audit: Vec<AuditEntry>,
}

impl ThresholdState {
    pub fn new(floor: Utility) -> Self {
        ThresholdState {
            delta: floor,
            audit: Vec::new(),
        }
    }

    /// Records an attempted raise to `candidate` (ignored unless higher).
    pub fn raise(&mut self, candidate: Utility, strategy: &'static str) {
        let old = self.delta;
        if candidate > self.delta {
            self.delta = candidate;
        }
        self.audit.push(AuditEntry {
            strategy,
            old,
            new: self.delta,
        });
    }
}

/// Kth highest value of a multiset, or `None` when fewer than `k` values.
pub fn kth_highest(mut values: Vec<Utility>, k: usize) -> Option<Utility> {
    if k == 0 || values.len() < k {
        return None;
    }
    let idx = k - 1;
    let (_, kth, _) = values.select_nth_unstable_by(idx, |a, b| b.cmp(a));
    Some(*kth)
}

/// The shared kernel of the count-based raising strategies: if at least `k`
/// values exist and the kth highest beats the current threshold, raise to it.
/// The audit entry is appended either way.
pub fn raise_to_kth(
    values: impl IntoIterator<Item = Utility>,
    k: usize,
    state: &mut ThresholdState,
    strategy: &'static str,
) {
    let values: Vec<Utility> = values.into_iter().collect();
    match kth_highest(values, k) {
        Some(v) => state.raise(v, strategy),
        None => state.raise(state.delta, strategy),
    }
}

/// Pre-evaluation matrix: pair keys are formed from each transaction's first
/// item (in original input order) and every other item of that transaction;
/// each keyed pair accumulates its utility over all transactions containing
/// it. On the worked example this raises K=6 from 0 to 32.
pub fn build_pe_matrix(db: &Database) -> SparsePairMatrix {
    let mut matrix = SparsePairMatrix::new(PairKind::PeLowerBound);
    let mut keys: HashSet<(ItemId, ItemId)> = HashSet::new();
    let mut all = SparsePairMatrix::new(PairKind::PeLowerBound);
    for t in &db.transactions {
        let first = match t.items.first() {
            Some(&x) => x,
            None => continue,
        };
        for i in 0..t.items.len() {
            for j in i + 1..t.items.len() {
                all.add(t.items[i], t.items[j], t.utils[i] + t.utils[j]);
            }
        }
        for &x in &t.items[1..] {
            keys.insert(SparsePairMatrix::key(first, x));
        }
    }
    for (pair, v) in all.pairs() {
        if keys.contains(&pair) {
            matrix.entries.insert(pair, v);
        }
    }
    matrix
}

/// Pre-evaluation with utility-descending anchor: as PE, but each transaction
/// anchors on its maximum-external-utility item (ties to the smallest id) and
/// only the anchoring transaction contributes to the pair. `profits` is the
/// per-unit external utility indexed by dense id.
pub fn build_pmud_matrix(db: &Database, profits: &[Utility]) -> Result<SparsePairMatrix> {
    if profits.len() < db.item_count() {
        return Err(Error::InvalidArgument(format!(
            "profits cover {} of {} items",
            profits.len(),
            db.item_count()
        )));
    }
    let mut matrix = SparsePairMatrix::new(PairKind::PmudLowerBound);
    for t in &db.transactions {
        if t.len() < 2 {
            continue;
        }
        let anchor_pos = (0..t.items.len())
            .min_by_key(|&i| (Reverse(profits[t.items[i] as usize]), t.items[i]))
            .expect("non-empty transaction");
        let anchor = t.items[anchor_pos];
        for (i, (&x, &u)) in t.items.iter().zip(&t.utils).enumerate() {
            if i != anchor_pos {
                matrix.add(anchor, x, t.utils[anchor_pos] + u);
            }
        }
    }
    Ok(matrix)
}

/// Raise by real 1-item utilities.
pub fn riu_raise(stats: &ItemStats, k: usize, state: &mut ThresholdState) {
    raise_to_kth(stats.riu_values(), k, state, "riu");
}

/// RSD matrix: the ceil(n/2) highest-support and floor(n/2) lowest-support
/// items are selected (support ties rank the smaller original label higher),
/// all selected pairs start at zero, and a scan accumulates exact pair
/// utilities.
pub fn build_rsd_matrix(db: &Database, stats: &ItemStats, n: usize) -> Result<SparsePairMatrix> {
    let item_count = db.item_count();
    if n < 2 || n > item_count {
        return Err(Error::InvalidArgument(format!(
            "rsd item count {n} out of range 2..={item_count}"
        )));
    }
    let mut ranked: Vec<ItemId> = (0..item_count as ItemId).collect();
    ranked.sort_by_key(|&i| (Reverse(stats.support(i)), db.label_of(i)));
    let high = n.div_ceil(2);
    let low = n / 2;
    let mut selected: Vec<ItemId> = ranked[..high].to_vec();
    selected.extend_from_slice(&ranked[item_count - low..]);
    selected.sort_unstable();

    let mut matrix = SparsePairMatrix::new(PairKind::RsdExact);
    for i in 0..selected.len() {
        for j in i + 1..selected.len() {
            matrix
                .entries
                .insert(SparsePairMatrix::key(selected[i], selected[j]), 0);
        }
    }
    let in_matrix: HashSet<ItemId> = selected.into_iter().collect();
    for t in &db.transactions {
        let present: Vec<(ItemId, Utility)> = t
            .items
            .iter()
            .zip(&t.utils)
            .filter(|(x, _)| in_matrix.contains(x))
            .map(|(&x, &u)| (x, u))
            .collect();
        for i in 0..present.len() {
            for j in i + 1..present.len() {
                matrix.add(present[i].0, present[j].0, present[i].1 + present[j].1);
            }
        }
    }
    Ok(matrix)
}

/// Raise by the exact pair utilities of the co-occurrence matrix.
pub fn cud_raise(cudm: &SparsePairMatrix, k: usize, state: &mut ThresholdState) {
    debug_assert_eq!(cudm.kind(), PairKind::CudmExact);
    raise_to_kth(cudm.values(), k, state, "cud");
}

fn item_tidsets(db: &Database) -> Vec<Vec<Tid>> {
    let mut sets = vec![Vec::new(); db.item_count()];
    for t in &db.transactions {
        for &x in &t.items {
            sets[x as usize].push(t.tid);
        }
    }
    sets
}

fn is_subset(a: &[Tid], b: &[Tid]) -> bool {
    let mut it = b.iter();
    'outer: for &x in a {
        for &y in it.by_ref() {
            match y.cmp(&x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Items other than `x` whose tidsets contain the tidset of `x`, ascending
/// by id. Errors when `x` never occurs.
pub fn coverage(db: &Database, x: ItemId) -> Result<Vec<ItemId>> {
    if (x as usize) >= db.item_count() {
        return Err(Error::UnknownItem(x));
    }
    let tidsets = item_tidsets(db);
    if tidsets[x as usize].is_empty() {
        return Err(Error::InvalidArgument(format!(
            "item id {x} does not occur in the database"
        )));
    }
    Ok((0..db.item_count() as ItemId)
        .filter(|&y| y != x && is_subset(&tidsets[x as usize], &tidsets[y as usize]))
        .collect())
}

/// Coverage raise: for every item x and non-empty subset S of its coverage
/// (smallest subsets first, at most `cap` per item), the bound
/// `riu(x) + sum miu(y) * sup(x)` underestimates `U({x} u S)` because every
/// transaction covering x covers all of S. Mutually covering items reach the
/// same itemset from several anchors, so bounds are keyed by itemset and the
/// kth-highest runs over distinct itemsets only; counting one itemset twice
/// could push the threshold past the optimum.
pub fn cov_raise(
    db: &Database,
    stats: &ItemStats,
    k: usize,
    cap: usize,
    state: &mut ThresholdState,
) {
    let tidsets = item_tidsets(db);
    let mut bounds: HashMap<Vec<ItemId>, Utility> = HashMap::new();
    for x in 0..db.item_count() as ItemId {
        if tidsets[x as usize].is_empty() {
            continue;
        }
        let covering: Vec<ItemId> = (0..db.item_count() as ItemId)
            .filter(|&y| y != x && is_subset(&tidsets[x as usize], &tidsets[y as usize]))
            .collect();
        if covering.is_empty() {
            continue;
        }
        let sup = stats.support(x) as Utility;
        let mut emitted = 0usize;
        'sizes: for size in 1..=covering.len() {
            for subset in covering.iter().combinations(size) {
                if emitted >= cap {
                    break 'sizes;
                }
                let miu_sum: Utility = subset.iter().map(|&&y| stats.miu(y)).sum();
                let lb = stats.riu(x) + miu_sum * sup;
                let mut itemset: Vec<ItemId> = subset.into_iter().copied().collect();
                itemset.push(x);
                itemset.sort_unstable();
                let slot = bounds.entry(itemset).or_insert(lb);
                *slot = (*slot).max(lb);
                emitted += 1;
            }
        }
    }
    raise_to_kth(bounds.into_values(), k, state, "cov");
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HeapEntry {
    utility: Utility,
    key: Vec<u64>,
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // The minimum entry is the eviction victim: lowest utility, and on
        // ties the lexicographically largest label key, so the smallest key
        // is the boundary survivor.
        self.utility
            .cmp(&other.utility)
            .then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded min-heap of candidate itemsets keyed by sorted original labels.
/// Embodies the RUC strategy: once full, the kth highest stored utility is
/// the current threshold.
#[derive(Debug, Clone)]
pub struct TopKHeap {
    capacity: usize,
    floor: Utility,
    heap: BinaryHeap<Reverse<HeapEntry>>,
    members: HashSet<Vec<u64>>,
}

impl TopKHeap {
    pub fn new(capacity: usize, floor: Utility) -> Self {
        assert!(capacity >= 1, "top-k capacity must be at least 1");
        TopKHeap {
            capacity,
            floor,
            heap: BinaryHeap::with_capacity(capacity + 1),
            members: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.heap.len() == self.capacity
    }

    /// The threshold implied by the heap: the kth highest stored utility once
    /// full, never below the starting floor.
    pub fn current_delta(&self) -> Utility {
        if self.is_full() {
            let worst = self.heap.peek().expect("full heap is non-empty");
            self.floor.max(worst.0.utility)
        } else {
            self.floor
        }
    }

    /// Offers a candidate. It is stored iff its utility meets the current
    /// threshold and the key is not already present; the worst entry is
    /// evicted when over capacity. Returns the updated threshold.
    pub fn offer(&mut self, key: Vec<u64>, utility: Utility) -> Utility {
        if utility < self.current_delta() || self.members.contains(&key) {
            return self.current_delta();
        }
        self.members.insert(key.clone());
        self.heap.push(Reverse(HeapEntry { utility, key }));
        if self.heap.len() > self.capacity {
            let evicted = self.heap.pop().expect("over-capacity heap");
            self.members.remove(&evicted.0.key);
        }
        self.current_delta()
    }

    /// Drains into (key, utility) rows, descending utility then ascending key.
    pub fn into_sorted(self) -> Vec<(Vec<u64>, Utility)> {
        let mut rows: Vec<(Vec<u64>, Utility)> = self
            .heap
            .into_iter()
            .map(|Reverse(e)| (e.key, e.utility))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }
}
