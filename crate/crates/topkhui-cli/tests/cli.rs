//! End-to-end checks of the binary: exit codes, formats and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topkhui"))
}

fn sample_path() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample.txt");
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn mine_text_top3() {
    let out = run(&["mine", "--input", &sample_path(), "--k", "3", "--algo", "tko"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    assert_eq!(
        lines,
        vec![
            "1 3 5 #UTIL: 80",
            "1 3 4 5 6 #UTIL: 78",
            "1 3 4 6 #UTIL: 73"
        ]
    );
}

#[test]
fn mine_json_k12_matches_hui_table() {
    let out = run(&[
        "mine", "--input", &sample_path(), "--k", "12", "--algo", "khmc", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let topk = doc["topk"].as_array().unwrap();
    assert_eq!(topk.len(), 12);
    assert_eq!(doc["delta_final"], 59);
    assert_eq!(topk[0]["utility"], 80);
    assert_eq!(topk[11]["utility"], 59);
}

#[test]
fn mine_rejects_k_zero_as_usage_error() {
    let out = run(&["mine", "--input", &sample_path(), "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mine_rejects_unknown_strategy_token() {
    let out = run(&[
        "mine", "--input", &sample_path(), "--k", "3", "--strategies", "pe,bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mine_reports_parse_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2:10:4 4\n").unwrap();
    let out = run(&["mine", "--input", bad.to_str().unwrap(), "--k", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line 1"), "stderr was: {err}");

    // Lenient mode repairs the checksum and mines.
    let out = run(&[
        "mine", "--input", bad.to_str().unwrap(), "--k", "3", "--lenient",
    ]);
    assert!(out.status.success());
}

#[test]
fn mine_csv_is_byte_stable() {
    let args = [
        "mine", "--input", &sample_path(), "--k", "7", "--algo", "khmc", "--format", "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("itemset,utility\n"));
}

#[test]
fn verify_sample_exits_zero() {
    let out = run(&["verify", "--input", &sample_path(), "--k", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("tko: OK"));
    assert!(text.contains("khmc: OK"));
}

#[test]
fn verify_guard_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.txt");
    let mut lines = String::new();
    for label in 1..=25 {
        lines.push_str(&format!("{label}:1:1\n"));
    }
    std::fs::write(&wide, lines).unwrap();
    let out = run(&["verify", "--input", wide.to_str().unwrap(), "--k", "3"]);
    assert_eq!(out.status.code(), Some(3));
    // An explicit limit override lets it run.
    let out = run(&[
        "verify",
        "--input",
        wide.to_str().unwrap(),
        "--k",
        "3",
        "--oracle-limit",
        "30",
    ]);
    assert!(out.status.success());
}

#[test]
fn stats_prints_summary_and_rejects_empty() {
    let out = run(&["stats", "--input", &sample_path()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("transactions: 8"));
    assert!(text.contains("items: 7"));
    assert!(text.contains("avg_len: 4.75"));
    assert!(text.contains("density_pct: 67.8571"));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let out = run(&["stats", "--input", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_output_parses_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.txt");
    let out = run(&[
        "gen", "--seed", "5", "--trans", "50", "--items", "30", "--max-len", "23",
        "--fixed-len", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["stats", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("transactions: 50"));
    assert!(text.contains("items: 30"));
    assert!(text.contains("avg_len: 23"));
}

#[test]
fn bench_grid_csv_and_error_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"datasets":[{{"name":"sample","path":"{}"}}],"algos":["tko","khmc"],"ks":[3,12],"repetitions":2}}"#,
            sample_path().replace('\\', "/")
        ),
    )
    .unwrap();
    let out = run(&["bench", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset,algo,k,runtime_ms,candidates,joins,peak_mem_bytes,delta_final,topk_size"
    );
    assert_eq!(text.lines().count(), 5);
    for line in text.lines().skip(1) {
        assert!(line.starts_with("sample,"));
        assert!(line.ends_with(",3") || line.ends_with(",12"));
    }

    // A missing dataset produces error entries and exit 1.
    let config2 = dir.path().join("missing.json");
    std::fs::write(
        &config2,
        r#"{"datasets":[{"name":"gone","path":"/nonexistent/file.txt"}],"algos":["tko"],"ks":[3]}"#,
    )
    .unwrap();
    let out = run(&["bench", "--config", config2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
