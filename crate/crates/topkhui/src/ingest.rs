//! Reading and writing the `items:TU:utils` transaction format, dataset
//! characteristics, and seeded random databases for property tests.
//!
//! Each data line has three `:`-separated sections: the item labels, the
//! declared transaction utility, and the per-item utilities, e.g.
//! `1 3 5:16:5 2 9`. Lines starting with `#`, `%` or `@` are skipped.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{Database, Utility};
use crate::errors::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// When set (the default), a declared TU that disagrees with the utility
    /// sum is fatal; otherwise the TU is repaired by recomputation. Corrupt
    /// public corpora exist, so the lenient mode is opt-in.
    pub strict_tu: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict_tu: true }
    }
}

/// Parses a dataset with strict TU validation.
pub fn parse_dataset(reader: impl BufRead) -> Result<Database> {
    parse_dataset_with(reader, ParseOptions::default())
}

pub fn parse_dataset_with(reader: impl BufRead, opts: ParseOptions) -> Result<Database> {
    let mut rows: Vec<(Vec<u64>, Vec<Utility>)> = Vec::new();
    let mut declared: Vec<(usize, Utility)> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(['#', '%', '@']) {
            continue;
        }
        let mut sections = trimmed.split(':');
        let (items_s, tu_s, utils_s) = match (
            sections.next(),
            sections.next(),
            sections.next(),
            sections.next(),
        ) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected exactly three ':'-separated sections".into(),
                })
            }
        };
        let labels = parse_ints::<u64>(items_s, line_no, "item")?;
        let utils = parse_ints::<Utility>(utils_s, line_no, "utility")?;
        if labels.len() != utils.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "{} items but {} utilities",
                    labels.len(),
                    utils.len()
                ),
            });
        }
        let tu: Utility = tu_s.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad transaction utility token '{}'", tu_s.trim()),
        })?;
        declared.push((line_no, tu));
        rows.push((labels, utils));
    }

    let db = map_row_errors(Database::from_label_rows(&rows), &declared)?;
    for (t, &(line, tu)) in db.transactions.iter().zip(&declared) {
        if tu != t.tu && opts.strict_tu {
            return Err(Error::TuMismatch {
                line,
                declared: tu,
                actual: t.tu,
            });
        }
    }
    Ok(db)
}

/// `from_label_rows` reports row positions; rewrite them as source lines.
fn map_row_errors(r: Result<Database>, declared: &[(usize, Utility)]) -> Result<Database> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line: declared[line - 1].0,
            msg,
        },
        other => other,
    })
}

fn parse_ints<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {what} token '{tok}'"),
            })
        })
        .collect()
}

/// Writes the database in the same line format, one transaction per line,
/// original labels, LF endings.
pub fn write_dataset(db: &Database, mut w: impl Write) -> std::io::Result<()> {
    for t in &db.transactions {
        let items = t
            .items
            .iter()
            .map(|&i| db.label_of(i).to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let utils = t
            .utils
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "{items}:{}:{utils}", t.tu)?;
    }
    Ok(())
}

pub fn write_dataset_string(db: &Database) -> String {
    let mut buf = Vec::new();
    write_dataset(db, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("labels and utilities are ASCII")
}

/// Transaction count, item count, mean transaction length and density in
/// percent (100 * avg_len / item_count).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DatasetSummary {
    pub trans_count: usize,
    pub item_count: usize,
    pub avg_len: f64,
    pub density_pct: f64,
}

pub fn dataset_summary(db: &Database) -> Result<DatasetSummary> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let trans_count = db.transaction_count();
    let item_count = db.item_count();
    let total_len: usize = db.transactions.iter().map(|t| t.len()).sum();
    let avg_len = total_len as f64 / trans_count as f64;
    Ok(DatasetSummary {
        trans_count,
        item_count,
        avg_len,
        density_pct: 100.0 * avg_len / item_count as f64,
    })
}

/// Bounds for seeded random databases. Labels are 1..=max_items; every
/// transaction is non-empty with distinct items and utilities drawn uniformly
/// from `util_range` (inclusive).
#[derive(Debug, Clone, Copy)]
pub struct RandomDbSpec {
    pub seed: u64,
    pub max_items: u32,
    pub max_trans: u32,
    pub max_len: u32,
    pub util_range: (Utility, Utility),
}

impl RandomDbSpec {
    fn validate(&self) {
        assert!(self.max_items >= 1 && self.max_trans >= 1 && self.max_len >= 1);
        assert!(self.max_len <= self.max_items);
        assert!(self.util_range.0 >= 1 && self.util_range.0 <= self.util_range.1);
    }
}

/// Deterministic for a fixed seed.
pub fn gen_random_db(spec: &RandomDbSpec) -> Database {
    spec.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let trans = rng.gen_range(1..=spec.max_trans);
    let mut rows = Vec::with_capacity(trans as usize);
    for _ in 0..trans {
        let len = rng.gen_range(1..=spec.max_len) as usize;
        let mut labels: Vec<u64> = Vec::with_capacity(len);
        while labels.len() < len {
            let label = rng.gen_range(1..=spec.max_items) as u64;
            if !labels.contains(&label) {
                labels.push(label);
            }
        }
        let utils = (0..len)
            .map(|_| rng.gen_range(spec.util_range.0..=spec.util_range.1))
            .collect();
        rows.push((labels, utils));
    }
    Database::from_label_rows(&rows).expect("generated rows are well-formed")
}

/// Dense fixed-length generator used for scale tests and benches: `trans`
/// transactions of exactly `trans_len` distinct items over an `items`-sized
/// alphabet, with every item guaranteed to appear at least once.
pub fn gen_dense_db(
    seed: u64,
    trans: u32,
    items: u32,
    trans_len: u32,
    util_max: Utility,
) -> Database {
    assert!(trans_len <= items && trans >= 1 && util_max >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trans as usize);
    for t in 0..trans {
        let mut labels: Vec<u64> = Vec::with_capacity(trans_len as usize);
        // Seed row t with item (t mod items) so the alphabet is fully used.
        labels.push((t % items) as u64 + 1);
        while labels.len() < trans_len as usize {
            let label = rng.gen_range(1..=items) as u64;
            if !labels.contains(&label) {
                labels.push(label);
            }
        }
        let utils = (0..trans_len).map(|_| rng.gen_range(1..=util_max)).collect();
        rows.push((labels, utils));
    }
    Database::from_label_rows(&rows).expect("generated rows are well-formed")
}
