//! Benchmark harness: runs a grid of (dataset, algorithm, K) cells, reports
//! per-cell medians as CSV or JSON, and hosts the oracle-diff used by the
//! verification command. Grid cells are independent; with the `parallel`
//! feature they fan out over a rayon pool, otherwise they run sequentially.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::core::Database;
use crate::errors::{Error, Result};
use crate::ingest::parse_dataset;
use crate::miners::{khmc_mine, oracle_topk_with_limit, tko_mine, MinerOptions, MiningResult};
use crate::strategies::AuditEntry;

/// Mines `db` with the named algorithm and its default options.
pub fn run_algo(db: &Database, algo: &str, k: usize) -> Result<MiningResult> {
    run_algo_with_limit(db, algo, k, crate::miners::ORACLE_ITEM_LIMIT)
}

pub fn run_algo_with_limit(
    db: &Database,
    algo: &str,
    k: usize,
    oracle_limit: usize,
) -> Result<MiningResult> {
    match algo {
        "tko" => tko_mine(db, k, &MinerOptions::tko()),
        "khmc" => khmc_mine(db, k, &MinerOptions::khmc()),
        "oracle" => oracle_topk_with_limit(db, k, oracle_limit),
        other => Err(Error::InvalidArgument(format!(
            "unknown algorithm '{other}' (expected tko, khmc or oracle)"
        ))),
    }
}

/// Applies `f` to every element, in parallel when the `parallel` feature is
/// enabled and `parallel` is true, preserving input order either way.
pub fn map_cells<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.into_par_iter().map(f).collect();
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}

#[derive(Debug, Clone, serde::Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub path: String,
}

fn default_repetitions() -> usize {
    3
}

/// Grid description for a bench run, read from a JSON file.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSpec>,
    pub algos: Vec<String>,
    pub ks: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Attach the threshold audit trail to each JSON row.
    #[serde(default)]
    pub audit: bool,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad bench config: {e}")))
    }
}

/// One grid cell: counters are from the first repetition (they are
/// deterministic), the runtime is the median over repetitions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunRow {
    pub dataset: String,
    pub algo: String,
    pub k: usize,
    pub runtime_ms: f64,
    pub candidates: u64,
    pub joins: u64,
    pub peak_mem_bytes: u64,
    pub delta_final: i64,
    pub topk_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<AuditEntry>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunError {
    pub dataset: String,
    pub algo: String,
    pub k: usize,
    pub error: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunReport {
    pub rows: Vec<RunRow>,
    pub errors: Vec<RunError>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("runtimes are finite"));
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Runs the whole grid. Datasets that fail to load produce one error entry
/// per affected cell and leave the other rows intact.
pub fn run_bench(config: &BenchConfig, parallel: bool) -> RunReport {
    let reps = config.repetitions.max(1);
    let mut datasets: Vec<(String, Result<Database>)> = Vec::new();
    for spec in &config.datasets {
        let loaded = File::open(Path::new(&spec.path))
            .map_err(Error::from)
            .and_then(|f| parse_dataset(BufReader::new(f)));
        datasets.push((spec.name.clone(), loaded));
    }

    let mut cells: Vec<(usize, String, usize)> = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for algo in &config.algos {
            for &k in &config.ks {
                cells.push((di, algo.clone(), k));
            }
        }
    }

    let datasets_ref = &datasets;
    let audit = config.audit;
    let outcomes = map_cells(cells, parallel, move |(di, algo, k)| {
        let (name, loaded) = &datasets_ref[di];
        let db = match loaded {
            Ok(db) => db,
            Err(e) => {
                return Err(RunError {
                    dataset: name.clone(),
                    algo,
                    k,
                    error: e.to_string(),
                })
            }
        };
        let mut runtimes = Vec::with_capacity(reps);
        let mut first: Option<MiningResult> = None;
        for _ in 0..reps {
            match run_algo(db, &algo, k) {
                Ok(result) => {
                    runtimes.push(result.stats.elapsed_ms);
                    if first.is_none() {
                        first = Some(result);
                    }
                }
                Err(e) => {
                    return Err(RunError {
                        dataset: name.clone(),
                        algo,
                        k,
                        error: e.to_string(),
                    })
                }
            }
        }
        let result = first.expect("reps >= 1");
        Ok(RunRow {
            dataset: name.clone(),
            algo,
            k,
            runtime_ms: median(runtimes),
            candidates: result.stats.candidates,
            joins: result.stats.joins,
            peak_mem_bytes: result.stats.peak_mem_bytes,
            delta_final: result.delta_final,
            topk_size: result.topk.len(),
            audit: audit.then(|| result.audit.clone()),
        })
    });

    let mut report = RunReport {
        rows: Vec::new(),
        errors: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(row) => report.rows.push(row),
            Err(e) => report.errors.push(e),
        }
    }
    report
}

pub const CSV_HEADER: &str =
    "dataset,algo,k,runtime_ms,candidates,joins,peak_mem_bytes,delta_final,topk_size";

/// Fixed-column CSV; identical inputs give identical bytes apart from the
/// runtime column.
pub fn report_to_csv(report: &RunReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{:.3},{},{},{},{},{}\n",
            r.dataset,
            r.algo,
            r.k,
            r.runtime_ms,
            r.candidates,
            r.joins,
            r.peak_mem_bytes,
            r.delta_final,
            r.topk_size
        ));
    }
    out
}

pub fn report_to_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Human-readable mismatch lines between two result lists, empty when they
/// agree exactly (same itemsets, same utilities, same order).
pub fn diff_results(expected: &MiningResult, actual: &MiningResult) -> Vec<String> {
    let mut diffs = Vec::new();
    let rows = expected.topk.len().max(actual.topk.len());
    for i in 0..rows {
        let left = expected.topk.get(i);
        let right = actual.topk.get(i);
        if left != right {
            let show = |r: Option<&crate::miners::RankedItemset>| match r {
                Some(r) => format!(
                    "{} #UTIL: {}",
                    r.items
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                    r.utility
                ),
                None => "(missing)".to_string(),
            };
            diffs.push(format!(
                "rank {}: expected {} got {}",
                i + 1,
                show(left),
                show(right)
            ));
        }
    }
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::testutil::sample_db;
    use crate::miners::RankedItemset;

    #[test]
    fn median_handles_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(vec![]), 0.0);
    }

    #[test]
    fn run_algo_dispatches() {
        let db = sample_db();
        for algo in ["tko", "khmc", "oracle"] {
            let r = run_algo(&db, algo, 3).unwrap();
            assert_eq!(r.topk.len(), 3);
            assert_eq!(r.delta_final, 73);
        }
        assert!(run_algo(&db, "upgrowth", 3).is_err());
    }

    #[test]
    fn map_cells_preserves_order() {
        let doubled = map_cells(vec![1, 2, 3, 4], true, |x| x * 2);
        assert_eq!(doubled, vec![2, 4, 6, 8]);
        let seq = map_cells(vec![1, 2, 3, 4], false, |x| x * 2);
        assert_eq!(seq, doubled);
    }

    #[test]
    fn bench_grid_produces_one_row_per_cell() {
        let dir = std::env::temp_dir().join(format!("topkhui-bench-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sample.txt");
        std::fs::write(&path, crate::core::testutil::SAMPLE).unwrap();
        let config = BenchConfig {
            datasets: vec![
                DatasetSpec {
                    name: "sample".into(),
                    path: path.to_string_lossy().into_owned(),
                },
                DatasetSpec {
                    name: "missing".into(),
                    path: dir.join("nope.txt").to_string_lossy().into_owned(),
                },
            ],
            algos: vec!["tko".into(), "khmc".into()],
            ks: vec![3, 12],
            repetitions: 2,
            audit: false,
        };
        let report = run_bench(&config, false);
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.errors.len(), 4);
        assert!(report.rows.iter().all(|r| r.dataset == "sample"));

        let csv = report_to_csv(&report);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
        // Counter columns are identical across repeated runs.
        let again = run_bench(&config, false);
        let strip = |s: &str| -> Vec<String> {
            s.lines()
                .map(|l| {
                    let mut cols: Vec<&str> = l.split(',').collect();
                    if cols.len() > 3 {
                        cols.remove(3);
                    }
                    cols.join(",")
                })
                .collect()
        };
        assert_eq!(strip(&csv), strip(&report_to_csv(&again)));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg = BenchConfig::from_json(
            r#"{"datasets":[{"name":"x","path":"x.txt"}],"algos":["tko"],"ks":[5]}"#,
        )
        .unwrap();
        assert_eq!(cfg.repetitions, 3);
        assert!(!cfg.audit);
        assert!(BenchConfig::from_json("not json").is_err());
    }

    #[test]
    fn diff_reports_mismatches_and_agreement() {
        let db = sample_db();
        let a = run_algo(&db, "oracle", 3).unwrap();
        let b = run_algo(&db, "tko", 3).unwrap();
        assert!(diff_results(&a, &b).is_empty());

        // Negative control: a deliberately corrupted result diffs.
        let mut broken = b.clone();
        broken.topk[1] = RankedItemset {
            items: vec![1],
            utility: 45,
        };
        let diffs = diff_results(&a, &broken);
        assert_eq!(diffs.len(), 1);
        assert!(diffs[0].contains("rank 2"));
    }
}
