//! Top-k high utility itemset mining over integer-utility transaction databases.
//!
//! The crate implements the two one-phase top-k miners built on utility lists,
//! TKO and KHMC, together with the threshold-raising strategies and pruning
//! properties they draw from (PE, PMUD, RIU, RSD, CUD, COV, RUC; U-Prune, RUZ,
//! EPB, EA, EUCS), an UP-Tree builder for the tree-based NU/MD raises, an
//! exhaustive oracle for cross-validation, and a small benchmark harness.
//!
//! Entry points:
//! - [`ingest::parse_dataset`] reads the `items:TU:utils` transaction format.
//! - [`miners::tko_mine`] / [`miners::khmc_mine`] mine the top-k itemsets.
//! - [`miners::oracle_topk`] is the brute-force ground truth for small inputs.
//! - [`harness::run_bench`] runs a grid of (dataset, algorithm, K) cells.

pub mod core;
pub mod harness;
pub mod ingest;
pub mod miners;
pub mod strategies;
pub mod ulist;
pub mod uptree;

mod errors;

pub use crate::core::{
    compute_item_stats, Database, ItemId, ItemOrder, ItemStats, Tid, Transaction, Utility,
};
pub use crate::errors::{Error, Result};
pub use crate::miners::{MinerOptions, MiningResult, RankedItemset};
