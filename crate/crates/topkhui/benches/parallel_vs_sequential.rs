//! Compares the parallel and sequential execution of the embarrassingly
//! parallel workloads: a seed sweep of miner-vs-oracle verifications and a
//! bench grid over a generated dense dataset.
//!
//! Run with `cargo bench -p topkhui`. Without the default `parallel` feature
//! only the sequential arms are measured.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use topkhui::harness::{map_cells, run_algo};
use topkhui::ingest::{gen_dense_db, gen_random_db, RandomDbSpec};
use topkhui::miners::{khmc_mine, oracle_topk, tko_mine, MinerOptions};

fn seed_sweep(parallel: bool, seeds: u64) -> usize {
    let outcomes = map_cells((0..seeds).collect(), parallel, |seed| {
        let db = gen_random_db(&RandomDbSpec {
            seed,
            max_items: 12,
            max_trans: 20,
            max_len: 6,
            util_range: (1, 10),
        });
        let oracle = oracle_topk(&db, 5).unwrap();
        let tko = tko_mine(&db, 5, &MinerOptions::tko()).unwrap();
        let khmc = khmc_mine(&db, 5, &MinerOptions::khmc()).unwrap();
        assert_eq!(oracle.topk, tko.topk);
        assert_eq!(oracle.topk, khmc.topk);
        oracle.topk.len()
    });
    outcomes.into_iter().sum()
}

fn bench_seed_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("seed_sweep_k5_x64");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(seed_sweep(false, 64)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| black_box(seed_sweep(true, 64))));
    group.finish();
}

fn grid(parallel: bool, db: &topkhui::Database) -> u64 {
    let cells: Vec<(&str, usize)> = vec![("tko", 10), ("tko", 50), ("khmc", 10), ("khmc", 50)];
    let counts = map_cells(cells, parallel, |(algo, k)| {
        run_algo(db, algo, k).unwrap().stats.candidates
    });
    counts.into_iter().sum()
}

fn bench_grid(c: &mut Criterion) {
    let db = gen_dense_db(42, 2000, 80, 12, 10);
    let mut group = c.benchmark_group("grid_2000x80_dense");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| black_box(grid(false, &db))));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| black_box(grid(true, &db))));
    group.finish();
}

criterion_group!(benches, bench_seed_sweep, bench_grid);
criterion_main!(benches);
