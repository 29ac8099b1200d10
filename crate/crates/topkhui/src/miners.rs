//! The one-phase top-k miners (TKO and KHMC) over the shared utility-list
//! engine, a brute-force top-k oracle for cross-validation, a plain
//! threshold-based high-utility miner, and the pruning predicates they share.

use std::time::Instant;

use crate::core::{
    apply_dgu, compute_item_stats, reorder_database, twu_order, Database, ItemId, ItemOrder,
    Utility,
};
use crate::errors::{Error, Result};
use crate::strategies::{
    build_pe_matrix, build_pmud_matrix, build_rsd_matrix, cov_raise, cud_raise, raise_to_kth,
    riu_raise, AuditEntry, SparsePairMatrix, ThresholdState, TopKHeap,
};
use crate::ulist::{build_1item_ulists, build_cudm, build_eucst, join_ulists, JoinOutcome, UtilityList};

/// Strategy and pruning toggles for a mining run. The candidate heap (RUC)
/// is the backbone of both algorithms and cannot be disabled.
#[derive(Debug, Clone)]
pub struct MinerOptions {
    pub pe: bool,
    pub pmud: bool,
    pub riu: bool,
    pub rsd: bool,
    pub cud: bool,
    pub cov: bool,
    pub ruc: bool,
    pub uprune: bool,
    pub ruz: bool,
    pub epb: bool,
    pub ea: bool,
    pub eucs: bool,
    /// Number of promising items selected for the RSD matrix.
    pub rsd_n: usize,
    /// Cap on enumerated coverage subsets per item for the COV raise.
    pub cov_cap: usize,
}

impl MinerOptions {
    fn base() -> Self {
        MinerOptions {
            pe: false,
            pmud: false,
            riu: false,
            rsd: false,
            cud: false,
            cov: false,
            ruc: true,
            uprune: false,
            ruz: false,
            epb: false,
            ea: false,
            eucs: false,
            rsd_n: 4,
            cov_cap: 1024,
        }
    }

    /// TKO defaults: PE raise, then RUC with RUZ, EPB and U-Prune.
    pub fn tko() -> Self {
        MinerOptions {
            pe: true,
            uprune: true,
            ruz: true,
            epb: true,
            ..Self::base()
        }
    }

    /// KHMC defaults: RIU, CUD and COV raises, then RUC with U-Prune, early
    /// abandonment and EUCS pair pruning.
    pub fn khmc() -> Self {
        MinerOptions {
            riu: true,
            cud: true,
            cov: true,
            uprune: true,
            ea: true,
            eucs: true,
            ..Self::base()
        }
    }
}

/// Per-run counters. Candidates are the utility lists materialized during
/// the search; peak memory is an allocator-independent high-water estimate
/// of the live utility-list bytes, not a process RSS figure.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct MiningStats {
    pub candidates: u64,
    pub joins: u64,
    pub uprune_cuts: u64,
    pub ruz_cuts: u64,
    pub eucs_skips: u64,
    pub ea_abandons: u64,
    pub dgu_items_dropped: u64,
    pub elapsed_ms: f64,
    pub peak_mem_bytes: u64,
}

/// One mined itemset in original labels (ascending) with its exact utility.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RankedItemset {
    pub items: Vec<u64>,
    pub utility: Utility,
}

/// Result rows descend by utility, ties ascending by label key; when the
/// result is full, `delta_final` is the smallest utility in it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MiningResult {
    pub topk: Vec<RankedItemset>,
    pub delta_final: Utility,
    pub stats: MiningStats,
    pub audit: Vec<AuditEntry>,
}

/// U-Prune: keep the subtree iff `U(X) + RU(X)` can still reach the
/// threshold.
pub fn u_prune(ul: &UtilityList, delta: Utility) -> bool {
    ul.estimate() >= delta
}

/// RUZ: cut all extensions iff `NZEU(X) + RU(X)` is below the threshold.
/// Returns true when the extensions are to be cut.
pub fn ruz_prune(ul: &UtilityList, delta: Utility) -> bool {
    ul.nzeu() + ul.sum_rutil < delta
}

/// EPB: explore the most promising branches first, descending by estimated
/// utility, ties in canonical itemset order.
pub fn epb_order(uls: &mut [UtilityList], order: &ItemOrder) {
    uls.sort_by(|a, b| {
        b.estimate()
            .cmp(&a.estimate())
            .then_with(|| order.cmp_itemsets(&a.itemset, &b.itemset))
    });
}

/// EUCS: skip the join of extensions ending in `x` and `y` iff the pair TWU
/// recorded in the EUCST cannot reach the threshold.
pub fn eucs_skip(eucst: &SparsePairMatrix, x: ItemId, y: ItemId, delta: Utility) -> bool {
    eucst.get(x, y) < delta
}

#[derive(Default)]
struct MemGauge {
    live: u64,
    peak: u64,
}

impl MemGauge {
    fn add(&mut self, bytes: u64) {
        self.live += bytes;
        self.peak = self.peak.max(self.live);
    }

    fn sub(&mut self, bytes: u64) {
        self.live -= bytes;
    }
}

struct SearchCtx<'a> {
    db: &'a Database,
    order: &'a ItemOrder,
    opts: &'a MinerOptions,
    eucst: Option<SparsePairMatrix>,
    heap: TopKHeap,
    state: ThresholdState,
    stats: MiningStats,
    mem: MemGauge,
}

impl SearchCtx<'_> {
    fn delta(&self) -> Utility {
        self.state.delta
    }

    fn offer(&mut self, ul: &UtilityList) {
        let key = self.db.label_key(&ul.itemset);
        let new_delta = self.heap.offer(key, ul.sum_iutil);
        if new_delta > self.state.delta {
            self.state.raise(new_delta, "ruc");
        }
    }

    /// Depth-first set-enumeration per the one-phase search: every visited
    /// list whose utility meets the threshold is offered to the heap, then
    /// the extension gate decides whether its subtree is grown.
    ///
    /// `uls` stays ascending under the mining order and join partners are
    /// always the lists after the visited one in that order; EPB only decides
    /// which subtree is explored first. Joining across the mining order would
    /// invalidate the remaining-utility bounds of the visited list's subtree.
    fn explore(&mut self, prefix: Option<&UtilityList>, uls: Vec<UtilityList>) -> Result<()> {
        let mut visit: Vec<usize> = (0..uls.len()).collect();
        if self.opts.epb {
            visit.sort_by(|&a, &b| {
                uls[b]
                    .estimate()
                    .cmp(&uls[a].estimate())
                    .then_with(|| self.order.cmp_itemsets(&uls[a].itemset, &uls[b].itemset))
            });
        }
        for i in visit {
            if uls[i].sum_iutil >= self.delta() {
                self.offer(&uls[i]);
            }
            let grow = if self.opts.ruz {
                let cut = ruz_prune(&uls[i], self.delta());
                if cut {
                    self.stats.ruz_cuts += 1;
                }
                !cut
            } else if self.opts.uprune {
                let keep = u_prune(&uls[i], self.delta());
                if !keep {
                    self.stats.uprune_cuts += 1;
                }
                keep
            } else {
                true
            };
            if !grow || i + 1 == uls.len() {
                continue;
            }

            let mut extensions: Vec<UtilityList> = Vec::new();
            let mut ext_bytes = 0u64;
            for j in i + 1..uls.len() {
                let (x, y) = (&uls[i], &uls[j]);
                if self.opts.eucs {
                    if let Some(eucst) = &self.eucst {
                        if eucs_skip(eucst, x.last_item(), y.last_item(), self.delta()) {
                            self.stats.eucs_skips += 1;
                            continue;
                        }
                    }
                }
                self.stats.joins += 1;
                let ea = self.opts.ea.then_some(self.delta());
                match join_ulists(prefix, x, y, self.order, ea)? {
                    JoinOutcome::Abandoned => self.stats.ea_abandons += 1,
                    JoinOutcome::Joined(ul) => {
                        if !ul.elements.is_empty() {
                            self.stats.candidates += 1;
                            ext_bytes += ul.approx_bytes();
                            extensions.push(ul);
                        }
                    }
                }
            }
            self.mem.add(ext_bytes);
            if !extensions.is_empty() {
                self.explore(Some(&uls[i]), extensions)?;
            }
            self.mem.sub(ext_bytes);
        }
        Ok(())
    }
}

fn empty_result() -> MiningResult {
    MiningResult {
        topk: Vec::new(),
        delta_final: 0,
        stats: MiningStats::default(),
        audit: Vec::new(),
    }
}

fn check_run_args(k: usize, opts: &MinerOptions) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !opts.ruc {
        return Err(Error::InvalidArgument(
            "the candidate heap (ruc) cannot be disabled".into(),
        ));
    }
    Ok(())
}

/// First-scan raises shared by both pipelines, applied in the fixed order
/// PE, PMUD, RIU, RSD. The PMUD anchor needs per-unit profits, which the
/// pre-multiplied file format does not carry; the per-item minimum utility
/// stands in as the profit proxy (exact whenever some covering transaction
/// has quantity 1).
fn first_scan_raises(
    db: &Database,
    stats: &crate::core::ItemStats,
    k: usize,
    opts: &MinerOptions,
    state: &mut ThresholdState,
) -> Result<()> {
    if opts.pe {
        let pe = build_pe_matrix(db);
        raise_to_kth(pe.values(), k, state, "pe");
    }
    if opts.pmud {
        let proxy: Vec<Utility> = (0..db.item_count() as ItemId).map(|i| stats.miu(i)).collect();
        let pmud = build_pmud_matrix(db, &proxy)?;
        raise_to_kth(pmud.values(), k, state, "pmud");
    }
    if opts.riu {
        riu_raise(stats, k, state);
    }
    if opts.rsd {
        let n = opts.rsd_n.min(db.item_count()).max(2);
        if db.item_count() >= 2 {
            let rsd = build_rsd_matrix(db, stats, n)?;
            raise_to_kth(rsd.values(), k, state, "rsd");
        }
    }
    Ok(())
}

fn run_one_phase(db: &Database, k: usize, opts: &MinerOptions) -> Result<MiningResult> {
    check_run_args(k, opts)?;
    if db.is_empty() {
        return Ok(empty_result());
    }
    let started = Instant::now();
    let stats_db = compute_item_stats(db);
    let mut state = ThresholdState::new(0);
    first_scan_raises(db, &stats_db, k, opts, &mut state)?;

    let filtered = apply_dgu(db, &stats_db, state.delta);
    let dropped = (0..db.item_count() as ItemId)
        .filter(|&i| stats_db.support(i) > 0 && stats_db.twu(i) < state.delta)
        .count() as u64;
    let order = twu_order(&stats_db);
    let rdb = reorder_database(&filtered, &order);

    let eucst = opts.eucs.then(|| build_eucst(&rdb));
    if opts.cud {
        let cudm = build_cudm(&rdb);
        cud_raise(&cudm, k, &mut state);
    }
    if opts.cov {
        // Bounds come from the raw database so that support, riu and miu all
        // refer to the same tidsets.
        cov_raise(db, &stats_db, k, opts.cov_cap, &mut state);
    }

    let lists = build_1item_ulists(&rdb, &order);
    let mut ctx = SearchCtx {
        db,
        order: &order,
        opts,
        eucst,
        heap: TopKHeap::new(k, state.delta),
        state,
        stats: MiningStats {
            dgu_items_dropped: dropped,
            ..Default::default()
        },
        mem: MemGauge::default(),
    };
    ctx.stats.candidates += lists.len() as u64;
    ctx.mem.add(lists.iter().map(|l| l.approx_bytes()).sum());
    ctx.explore(None, lists)?;

    let SearchCtx {
        heap,
        state,
        mut stats,
        mem,
        ..
    } = ctx;
    stats.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    stats.peak_mem_bytes = mem.peak;
    Ok(MiningResult {
        topk: heap
            .into_sorted()
            .into_iter()
            .map(|(items, utility)| RankedItemset { items, utility })
            .collect(),
        delta_final: state.delta,
        stats,
        audit: state.audit,
    })
}

/// TKO: PE raise on the first scan, DGU filter, utility lists, then the
/// search with RUC threshold raising, RUZ/U-Prune gating and EPB ordering.
pub fn tko_mine(db: &Database, k: usize, opts: &MinerOptions) -> Result<MiningResult> {
    run_one_phase(db, k, opts)
}

/// KHMC: RIU raise on the first scan, a second scan building the EUCST,
/// CUDM and utility lists, CUD and COV raises, then the search with RUC,
/// U-Prune, early-abandoning joins and EUCS pair pruning.
pub fn khmc_mine(db: &Database, k: usize, opts: &MinerOptions) -> Result<MiningResult> {
    run_one_phase(db, k, opts)
}

/// Default guard on the exhaustive oracle's item count.
pub const ORACLE_ITEM_LIMIT: usize = 20;

/// Brute-force ground truth: enumerates every itemset with non-empty cover
/// by depth-first cover intersection, computing utilities by direct
/// per-transaction summation (no remaining-utility machinery), and returns
/// the k best under (utility descending, label key ascending).
pub fn oracle_topk(db: &Database, k: usize) -> Result<MiningResult> {
    oracle_topk_with_limit(db, k, ORACLE_ITEM_LIMIT)
}

pub fn oracle_topk_with_limit(db: &Database, k: usize, limit: usize) -> Result<MiningResult> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if db.item_count() > limit {
        return Err(Error::OracleGuard {
            items: db.item_count(),
            limit,
        });
    }
    if db.is_empty() {
        return Ok(empty_result());
    }
    let started = Instant::now();
    let rows = enumerate_coverable(db);
    let mut ranked: Vec<RankedItemset> = rows
        .into_iter()
        .map(|(items, utility)| RankedItemset { items, utility })
        .collect();
    let enumerated = ranked.len() as u64;
    ranked.sort_by(|a, b| b.utility.cmp(&a.utility).then_with(|| a.items.cmp(&b.items)));
    ranked.truncate(k);
    let delta_final = if ranked.len() == k {
        ranked.last().map_or(0, |r| r.utility)
    } else {
        0
    };
    Ok(MiningResult {
        topk: ranked,
        delta_final,
        stats: MiningStats {
            candidates: enumerated,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        },
        audit: Vec::new(),
    })
}

/// Every coverable itemset with its exact utility, by cover intersection
/// over (transaction index, running utility) pairs.
fn enumerate_coverable(db: &Database) -> Vec<(Vec<u64>, Utility)> {
    let n = db.item_count();
    let mut item_covers: Vec<Vec<(u32, Utility)>> = vec![Vec::new(); n];
    for (idx, t) in db.transactions.iter().enumerate() {
        for (&x, &u) in t.items.iter().zip(&t.utils) {
            item_covers[x as usize].push((idx as u32, u));
        }
    }
    let mut out = Vec::new();
    let mut prefix: Vec<ItemId> = Vec::new();
    fn recurse(
        db: &Database,
        item_covers: &[Vec<(u32, Utility)>],
        start: usize,
        cover: Option<&[(u32, Utility)]>,
        prefix: &mut Vec<ItemId>,
        out: &mut Vec<(Vec<u64>, Utility)>,
    ) {
        for j in start..item_covers.len() {
            let child: Vec<(u32, Utility)> = match cover {
                None => item_covers[j].clone(),
                Some(c) => intersect_covers(c, &item_covers[j]),
            };
            if child.is_empty() {
                continue;
            }
            prefix.push(j as ItemId);
            let utility = child.iter().map(|&(_, u)| u).sum();
            out.push((db.label_key(prefix), utility));
            recurse(db, item_covers, j + 1, Some(&child), prefix, out);
            prefix.pop();
        }
    }
    recurse(db, &item_covers, 0, None, &mut prefix, &mut out);
    out
}

fn intersect_covers(a: &[(u32, Utility)], b: &[(u32, Utility)]) -> Vec<(u32, Utility)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All itemsets with utility at or above `delta`, mined with the utility-list
/// search under U-Prune alone. Rows sorted like a mining result.
pub fn hui_mine(db: &Database, delta: Utility) -> Result<Vec<RankedItemset>> {
    if delta < 1 {
        return Err(Error::InvalidArgument(
            "threshold must be at least 1".into(),
        ));
    }
    if db.is_empty() {
        return Ok(Vec::new());
    }
    let stats = compute_item_stats(db);
    let filtered = apply_dgu(db, &stats, delta);
    let order = twu_order(&stats);
    let rdb = reorder_database(&filtered, &order);
    let lists = build_1item_ulists(&rdb, &order);

    let mut out: Vec<RankedItemset> = Vec::new();
    fn grow(
        db: &Database,
        order: &ItemOrder,
        delta: Utility,
        prefix: Option<&UtilityList>,
        uls: Vec<UtilityList>,
        out: &mut Vec<RankedItemset>,
    ) -> Result<()> {
        for i in 0..uls.len() {
            let x = &uls[i];
            if x.sum_iutil >= delta {
                out.push(RankedItemset {
                    items: db.label_key(&x.itemset),
                    utility: x.sum_iutil,
                });
            }
            if !u_prune(x, delta) {
                continue;
            }
            let mut extensions = Vec::new();
            for y in &uls[i + 1..] {
                if let JoinOutcome::Joined(ul) = join_ulists(prefix, x, y, order, None)? {
                    if !ul.elements.is_empty() {
                        extensions.push(ul);
                    }
                }
            }
            if !extensions.is_empty() {
                grow(db, order, delta, Some(&uls[i]), extensions, out)?;
            }
        }
        Ok(())
    }
    grow(db, &order, delta, None, lists, &mut out)?;
    out.sort_by(|a, b| b.utility.cmp(&a.utility).then_with(|| a.items.cmp(&b.items)));
    Ok(out)
}
