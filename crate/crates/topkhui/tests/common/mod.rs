//! Shared helpers for the integration suites.

use topkhui::ingest::parse_dataset;
use topkhui::{Database, ItemId, Utility};

pub const SAMPLE: &str = include_str!("../../../../data/sample.txt");

/// The worked-example database; labels 1..=7 stand for items a..g.
pub fn sample_db() -> Database {
    parse_dataset(SAMPLE.as_bytes()).expect("sample dataset parses")
}

/// Labels helper: "aec" -> [1, 5, 3].
pub fn l(names: &str) -> Vec<u64> {
    names
        .chars()
        .map(|c| (c as u64) - ('a' as u64) + 1)
        .collect()
}

/// Ascending label key for an itemset given by letters.
pub fn key(names: &str) -> Vec<u64> {
    let mut v = l(names);
    v.sort_unstable();
    v
}

pub fn ids(db: &Database, names: &str) -> Vec<ItemId> {
    db.ids_of_labels(&l(names)).expect("labels exist")
}

/// Per-unit profits of items a..g, indexed by dense id.
pub fn sample_profits(db: &Database) -> Vec<Utility> {
    let per_label = [5, 2, 1, 2, 3, 1, 1];
    let mut out = vec![0; db.item_count()];
    for (off, &p) in per_label.iter().enumerate() {
        let id = db.id_of_label(off as u64 + 1).expect("label exists");
        out[id as usize] = p;
    }
    out
}
