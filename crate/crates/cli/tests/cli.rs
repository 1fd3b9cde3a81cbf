use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("allstd-cli-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn allstd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_allstd"))
        .args(args)
        .env_remove("ALLSTD_THREADS")
        .output()
        .expect("spawn allstd")
}

fn ok(args: &[&str]) -> Output {
    let out = allstd(args);
    assert!(
        out.status.success(),
        "allstd {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses a CSV body into header-keyed rows.
fn rows(path: &Path) -> Vec<Vec<(String, String)>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn get<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn gen_is_deterministic_and_summarizes() {
    let dir = Scratch::new("gen");
    let (a, b) = (dir.path("a.jsonl"), dir.path("b.jsonl"));
    let args = ["gen", "--env", "random-walk", "--n", "10", "--horizon", "20", "--seed", "7", "--out"];
    let out = ok(&[&args[..], &[s(&a)]].concat());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "n=10 H=20 d=5");
    ok(&[&args[..], &[s(&b)]].concat());
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert!(!first.contains(&b'\r'));
    assert_eq!(first.iter().filter(|c| **c == b'\n').count(), 11);
}

#[test]
fn mountain_car_records_have_two_features() {
    let dir = Scratch::new("car");
    let path = dir.path("car.jsonl");
    ok(&["gen", "--env", "mountain-car", "--n", "5", "--out", s(&path)]);
    let text = fs::read_to_string(&path).unwrap();
    let records: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(records.len(), 5);
    for r in records {
        assert!(r.contains("\"d\":2"), "{r}");
    }
}

#[test]
fn invalid_env_is_a_usage_error() {
    let out = allstd(&["gen", "--env", "cartpole"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["random-walk", "2048", "mountain-car"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        vec!["run", "--lambdas", "0.5,0.2"],
        vec!["run", "--lambda", "1.5"],
        vec!["run", "--trials", "0"],
        vec!["run", "--n", "1", "--trials", "1"],
        vec!["bench", "--method", "lstd-fixed"],
        vec!["run", "--method", "k-x-lstd", "--trials", "1", "--n", "5"],
        vec!["frobnicate"],
    ] {
        assert_eq!(allstd(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_failures_exit_three() {
    let dir = Scratch::new("io");
    assert_eq!(allstd(&["run", "--data", s(&dir.path("missing.jsonl"))]).status.code(), Some(3));
    assert_eq!(allstd(&["plot", "--data", s(&dir.path("missing.csv"))]).status.code(), Some(3));
    let garbage = dir.path("garbage.jsonl");
    fs::write(&garbage, "not json\n").unwrap();
    assert_eq!(allstd(&["run", "--data", s(&garbage)]).status.code(), Some(3));
    let blocked = dir.path("nope").join("out.jsonl");
    assert_eq!(allstd(&["gen", "--n", "2", "--out", s(&blocked)]).status.code(), Some(3));
}

#[test]
fn singular_system_exits_four() {
    // ridge 0 and two one-step episodes cannot determine five weights
    let out = allstd(&[
        "run", "--n", "2", "--horizon", "1", "--trials", "1", "--ridge", "0", "--method", "lstd-fixed", "--lambda", "0",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trial 0") && err.contains("λ 0"), "{err}");
}

#[test]
fn single_trial_single_lambda_is_one_row() {
    let dir = Scratch::new("one");
    let path = dir.path("run.csv");
    ok(&["run", "--n", "20", "--trials", "1", "--lambdas", "0.5", "--out", s(&path)]);
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "trial,method,n,lambda_used,score,root_msve,seconds");
    assert!(lines[1].starts_with("0,allstd,20,0.5,"));
}

#[test]
fn allstd_and_naive_cv_agree_per_trial() {
    let dir = Scratch::new("agree");
    let path = dir.path("run.csv");
    ok(&["run", "--n", "30", "--trials", "4", "--method", "allstd,naive-cv", "--out", s(&path)]);
    let rows = rows(&path);
    assert_eq!(rows.len(), 8);
    for pair in rows.chunks(2) {
        assert_eq!(get(&pair[0], "method"), "allstd");
        assert_eq!(get(&pair[1], "method"), "naive-cv");
        assert_eq!(get(&pair[0], "lambda_used"), get(&pair[1], "lambda_used"));
        let a: f64 = get(&pair[0], "root_msve").parse().unwrap();
        let b: f64 = get(&pair[1], "root_msve").parse().unwrap();
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn fixed_lambda_spread_on_mountain_car() {
    let dir = Scratch::new("spread");
    let path = dir.path("run.csv");
    ok(&["run", "--env", "mountain-car", "--n", "10", "--trials", "5", "--method", "lstd-fixed", "--out", s(&path)]);
    let rows = rows(&path);
    assert_eq!(rows.len(), 5 * 12);
    let mut means = std::collections::BTreeMap::<String, f64>::new();
    for r in &rows {
        *means.entry(get(r, "lambda_used").to_string()).or_default() += get(r, "root_msve").parse::<f64>().unwrap() / 5.0;
    }
    let best = means.values().copied().fold(f64::INFINITY, f64::min);
    let worst = means.values().copied().fold(0.0, f64::max);
    assert!(best < worst, "{means:?}");
}

#[test]
fn threads_do_not_change_results() {
    let dir = Scratch::new("threads");
    let (one, many) = (dir.path("one.csv"), dir.path("many.csv"));
    let args = ["run", "--n", "10,20", "--trials", "6", "--method", "allstd,lstd-fixed", "--lambda", "0.3", "--omit-timing"];
    ok(&[&args[..], &["--threads", "1", "--out", s(&one)]].concat());
    ok(&[&args[..], &["--threads", "4", "--out", s(&many)]].concat());
    assert_eq!(fs::read(&one).unwrap(), fs::read(&many).unwrap());
}

#[test]
fn run_reads_generated_data() {
    let dir = Scratch::new("data");
    let data = dir.path("rw.jsonl");
    let csv = dir.path("run.csv");
    ok(&["gen", "--n", "12", "--seed", "3", "--out", s(&data)]);
    ok(&["run", "--data", s(&data), "--n", "6,12", "--method", "allstd", "--out", s(&csv)]);
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2);
    assert_eq!(get(&rows[1], "n"), "12");
    assert!(!get(&rows[1], "root_msve").is_empty());
    assert_eq!(allstd(&["run", "--data", s(&data), "--n", "13"]).status.code(), Some(2));
}

#[test]
fn bench_rows_and_reference_methods() {
    let dir = Scratch::new("bench");
    let path = dir.path("bench.csv");
    ok(&["bench", "--n", "10,20", "--horizon", "10", "--out", s(&path)]);
    let rows = rows(&path);
    assert_eq!(rows.len(), 8);
    let methods: Vec<&str> = rows.iter().map(|r| get(r, "method")).collect();
    assert!(methods.contains(&"k-x-lstd") && methods.contains(&"k-x-rlstd"));
    for r in &rows {
        assert_eq!(get(r, "H"), "10");
        assert_eq!(get(r, "d"), "5");
        assert_eq!(get(r, "k"), "12");
        let t: f64 = get(r, "median_seconds").parse().unwrap();
        assert!(t > 0.0 && t.is_finite());
    }
}

#[test]
fn plot_empty_csv_says_no_data() {
    let dir = Scratch::new("plot-empty");
    let csv = dir.path("empty.csv");
    let svg = dir.path("empty.svg");
    fs::write(&csv, "trial,method,n,lambda_used,score,root_msve,seconds\n").unwrap();
    ok(&["plot", "--data", s(&csv), "--out", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("<svg") && text.trim_end().ends_with("</svg>"));
    assert!(text.contains(">no data<"));
    assert!(!text.contains("<polyline"));
}

#[test]
fn plot_draws_one_polyline_per_series() {
    let dir = Scratch::new("plot-two");
    let csv = dir.path("run.csv");
    let svg = dir.path("run.svg");
    ok(&["run", "--n", "10,20", "--trials", "2", "--method", "allstd,naive-cv", "--out", s(&csv)]);
    ok(&["plot", "--data", s(&csv), "--out", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(text.contains(">root_msve<") && text.contains(">n<"));
}

#[test]
fn timing_plot_uses_decade_ticks() {
    let dir = Scratch::new("plot-log");
    let csv = dir.path("bench.csv");
    let svg = dir.path("bench.svg");
    fs::write(
        &csv,
        "method,n,H,d,k,median_seconds\nallstd,10,20,5,12,0.002\nallstd,100,20,5,12,0.03\nnaive-cv,10,20,5,12,0.01\nnaive-cv,100,20,5,12,0.9\n",
    )
    .unwrap();
    ok(&["plot", "--data", s(&csv), "--out", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    for tick in ["1e-3", "1e-2", "1e-1", "1e0"] {
        assert!(text.contains(&format!(">{tick}<")), "missing {tick}");
    }
    assert_eq!(text.matches("<polyline").count(), 2);
}
