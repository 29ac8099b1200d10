//! Command line front end: mine top-k high utility itemsets, verify miners
//! against the exhaustive oracle, run benchmark grids and inspect datasets.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use topkhui::harness::{
    diff_results, report_to_csv, report_to_json, run_algo_with_limit, run_bench, BenchConfig,
};
use topkhui::ingest::{
    dataset_summary, gen_dense_db, gen_random_db, parse_dataset_with, write_dataset_string,
    ParseOptions, RandomDbSpec,
};
use topkhui::miners::ORACLE_ITEM_LIMIT;
use topkhui::{Database, Error, MinerOptions, MiningResult};

const EXIT_DATA: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(
    name = "topkhui",
    about = "Top-k high utility itemset mining (TKO / KHMC)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the top-k high utility itemsets of a dataset.
    Mine(MineArgs),
    /// Mine with the chosen algorithms and the exhaustive oracle, then diff.
    Verify(VerifyArgs),
    /// Run a (dataset, algorithm, K) benchmark grid from a JSON config.
    Bench(BenchArgs),
    /// Print dataset characteristics.
    Stats(StatsArgs),
    /// Generate a seeded random dataset in the transaction format.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Tko,
    Khmc,
    Oracle,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Tko => "tko",
            Algo::Khmc => "khmc",
            Algo::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct MineArgs {
    /// Dataset in items:TU:utils line format.
    #[arg(long)]
    input: PathBuf,
    /// Number of itemsets to mine.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_enum, default_value = "tko")]
    algo: Algo,
    /// Comma list overriding the algorithm's threshold-raising strategies:
    /// pe, pmud, riu, rsd, cud, cov, ruc (ruc is always on).
    #[arg(long)]
    strategies: Option<String>,
    /// Comma list overriding the pruning properties: uprune, ruz, epb, ea,
    /// eucs; 'none' disables all.
    #[arg(long)]
    prune: Option<String>,
    /// Promising-item count for the RSD matrix.
    #[arg(long, default_value_t = 4)]
    rsd_n: usize,
    /// Cap on enumerated coverage subsets per item for the COV raise.
    #[arg(long, default_value_t = 1024)]
    cov_cap: usize,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Report search counters on stderr (and in JSON output).
    #[arg(long)]
    stats: bool,
    /// Report the threshold audit trail on stderr (and in JSON output).
    #[arg(long)]
    audit: bool,
    /// Item-count guard for --algo oracle.
    #[arg(long, default_value_t = ORACLE_ITEM_LIMIT)]
    oracle_limit: usize,
    /// Repair transaction-utility mismatches instead of rejecting the file.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Algorithms to check against the oracle.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algo::Tko, Algo::Khmc])]
    algo: Vec<Algo>,
    #[arg(long, default_value_t = ORACLE_ITEM_LIMIT)]
    oracle_limit: usize,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON config: datasets, algos, ks, repetitions, audit.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Run grid cells one at a time instead of on the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    trans: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    items: u32,
    /// Items per transaction (the maximum, or the exact size with --fixed-len).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    max_len: u32,
    /// Give every transaction exactly max-len items and use the whole
    /// alphabet (dense generator).
    #[arg(long)]
    fixed_len: bool,
    #[arg(long, default_value_t = 1)]
    util_min: i64,
    #[arg(long, default_value_t = 10)]
    util_max: i64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Mine(args) => mine(args),
        Command::Verify(args) => verify(args),
        Command::Bench(args) => bench(args),
        Command::Stats(args) => stats(args),
        Command::Gen(args) => gen(args),
    }
}

fn load(path: &PathBuf, lenient: bool) -> Result<Database, ExitCode> {
    let file = File::open(path).map_err(|e| {
        eprintln!("error: cannot open {}: {e}", path.display());
        ExitCode::from(EXIT_DATA)
    })?;
    parse_dataset_with(
        BufReader::new(file),
        ParseOptions {
            strict_tu: !lenient,
        },
    )
    .map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_DATA)
    })
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::OracleGuard { .. } => ExitCode::from(EXIT_GUARD),
        _ => ExitCode::from(EXIT_DATA),
    }
}

fn apply_strategy_tokens(opts: &mut MinerOptions, list: &str) -> Result<(), String> {
    opts.pe = false;
    opts.pmud = false;
    opts.riu = false;
    opts.rsd = false;
    opts.cud = false;
    opts.cov = false;
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "pe" => opts.pe = true,
            "pmud" => opts.pmud = true,
            "riu" => opts.riu = true,
            "rsd" => opts.rsd = true,
            "cud" => opts.cud = true,
            "cov" => opts.cov = true,
            "ruc" => {} // always on
            other => return Err(format!("unknown strategy token '{other}'")),
        }
    }
    Ok(())
}

fn apply_prune_tokens(opts: &mut MinerOptions, list: &str) -> Result<(), String> {
    opts.uprune = false;
    opts.ruz = false;
    opts.epb = false;
    opts.ea = false;
    opts.eucs = false;
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token {
            "uprune" => opts.uprune = true,
            "ruz" => opts.ruz = true,
            "epb" => opts.epb = true,
            "ea" => opts.ea = true,
            "eucs" => opts.eucs = true,
            "none" => {}
            other => return Err(format!("unknown pruning token '{other}'")),
        }
    }
    Ok(())
}

fn render_text(result: &MiningResult) -> String {
    let mut out = String::new();
    for row in &result.topk {
        let items: Vec<String> = row.items.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{} #UTIL: {}\n", items.join(" "), row.utility));
    }
    out
}

fn render_csv(result: &MiningResult) -> String {
    let mut out = String::from("itemset,utility\n");
    for row in &result.topk {
        let items: Vec<String> = row.items.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{},{}\n", items.join(" "), row.utility));
    }
    out
}

fn render_json(result: &MiningResult, algo: &str, k: u64, stats: bool, audit: bool) -> String {
    let mut doc = serde_json::json!({
        "algo": algo,
        "k": k,
        "delta_final": result.delta_final,
        "topk": result.topk,
    });
    if stats {
        doc["stats"] = serde_json::to_value(&result.stats).expect("stats serialize");
    }
    if audit {
        doc["audit"] = serde_json::to_value(&result.audit).expect("audit serialize");
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), ExitCode> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            ExitCode::from(EXIT_DATA)
        }),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn print_stats(result: &MiningResult) {
    let s = &result.stats;
    eprintln!("# candidates: {}", s.candidates);
    eprintln!("# joins: {}", s.joins);
    eprintln!(
        "# prunes: uprune={} ruz={} eucs={} ea={} dgu_items={}",
        s.uprune_cuts, s.ruz_cuts, s.eucs_skips, s.ea_abandons, s.dgu_items_dropped
    );
    eprintln!("# elapsed_ms: {:.3}", s.elapsed_ms);
    eprintln!("# peak_mem_bytes: {}", s.peak_mem_bytes);
    eprintln!("# delta_final: {}", result.delta_final);
}

fn print_audit(result: &MiningResult) {
    for step in &result.audit {
        eprintln!("# delta {}: {} -> {}", step.strategy, step.old, step.new);
    }
}

fn mine(args: MineArgs) -> ExitCode {
    let db = match load(&args.input, args.lenient) {
        Ok(db) => db,
        Err(code) => return code,
    };
    let mut opts = match args.algo {
        Algo::Tko => MinerOptions::tko(),
        Algo::Khmc => MinerOptions::khmc(),
        Algo::Oracle => MinerOptions::tko(), // unused by the oracle
    };
    opts.rsd_n = args.rsd_n;
    opts.cov_cap = args.cov_cap;
    if let Some(list) = &args.strategies {
        if let Err(msg) = apply_strategy_tokens(&mut opts, list) {
            return usage_error(&msg);
        }
    }
    if let Some(list) = &args.prune {
        if let Err(msg) = apply_prune_tokens(&mut opts, list) {
            return usage_error(&msg);
        }
    }
    let k = args.k as usize;
    let result = match args.algo {
        Algo::Tko => topkhui::miners::tko_mine(&db, k, &opts),
        Algo::Khmc => topkhui::miners::khmc_mine(&db, k, &opts),
        Algo::Oracle => topkhui::miners::oracle_topk_with_limit(&db, k, args.oracle_limit),
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let text = match args.format {
        Format::Text => render_text(&result),
        Format::Csv => render_csv(&result),
        Format::Json => render_json(&result, args.algo.name(), args.k, args.stats, args.audit),
    };
    if args.stats {
        print_stats(&result);
    }
    if args.audit {
        print_audit(&result);
    }
    match emit(&args.output, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    let db = match load(&args.input, args.lenient) {
        Ok(db) => db,
        Err(code) => return code,
    };
    let k = args.k as usize;
    let oracle = match run_algo_with_limit(&db, "oracle", k, args.oracle_limit) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let mut all_match = true;
    for algo in &args.algo {
        if *algo == Algo::Oracle {
            continue;
        }
        let result = match run_algo_with_limit(&db, algo.name(), k, args.oracle_limit) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {}: {e}", algo.name());
                return exit_for(&e);
            }
        };
        let diffs = diff_results(&oracle, &result);
        if diffs.is_empty() {
            println!(
                "{}: OK ({} itemsets, delta_F={})",
                algo.name(),
                result.topk.len(),
                result.delta_final
            );
        } else {
            all_match = false;
            println!("{}: MISMATCH", algo.name());
            for d in diffs {
                println!("  {d}");
            }
        }
    }
    if all_match {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DATA)
    }
}

fn bench(args: BenchArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_DATA);
        }
    };
    let config = match BenchConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    let report = run_bench(&config, !args.sequential);
    let rendered = match args.format {
        Format::Csv => report_to_csv(&report),
        Format::Json => {
            let mut t = report_to_json(&report);
            t.push('\n');
            t
        }
        Format::Text => report_to_csv(&report),
    };
    for e in &report.errors {
        eprintln!("error: {}/{}/k={}: {}", e.dataset, e.algo, e.k, e.error);
    }
    if let Err(code) = emit(&args.output, &rendered) {
        return code;
    }
    if report.errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DATA)
    }
}

/// Four decimal places with trailing zeros trimmed: 23 -> "23",
/// 10.3000 -> "10.3", 49.33333 -> "49.3333".
fn trim4(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn stats(args: StatsArgs) -> ExitCode {
    let db = match load(&args.input, args.lenient) {
        Ok(db) => db,
        Err(code) => return code,
    };
    match dataset_summary(&db) {
        Ok(s) => {
            println!("transactions: {}", s.trans_count);
            println!("items: {}", s.item_count);
            println!("avg_len: {}", trim4(s.avg_len));
            println!("density_pct: {}", trim4(s.density_pct));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn gen(args: GenArgs) -> ExitCode {
    if args.max_len > args.items {
        return usage_error("max-len cannot exceed the item count");
    }
    if args.util_min < 1 || args.util_min > args.util_max {
        return usage_error("need 1 <= util-min <= util-max");
    }
    let db = if args.fixed_len {
        gen_dense_db(args.seed, args.trans, args.items, args.max_len, args.util_max)
    } else {
        gen_random_db(&RandomDbSpec {
            seed: args.seed,
            max_items: args.items,
            max_trans: args.trans,
            max_len: args.max_len,
            util_range: (args.util_min, args.util_max),
        })
    };
    match emit(&args.output, &write_dataset_string(&db)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
