//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use allstd_core::allstd::{allstd, default_grid, naive_cv_lstd};
use allstd_core::envs::{generate, random_walk_true_values, stream_rng, EnvConfig, EnvId};
use allstd_core::eval::{best_worst_fixed_lambda, oracle_root_msve, time_method, Workload, DEFAULT_RHO};
use allstd_core::linalg::{invert, recursive_sherman_morrison, relative_frobenius_error, sherman_morrison};
use allstd_core::lstd::{build_system, lstd, warm_start_inverse};
use allstd_core::testing::{monte_carlo_regression, random_dataset};
use allstd_core::{lstd_loto_cv, naive_loto_cv, Dataset, Matrix, Vector};
use rand::Rng;

const RIDGE: f64 = 1e-6;
const CV_LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Random small instance `i`: d ≤ 5, 2 ≤ n ≤ 8, H ≤ 10.
fn random_instance(i: u64) -> Dataset {
    let mut rng = stream_rng(0x00ac_ce97, i);
    let d = rng.random_range(1..=5);
    let n = rng.random_range(2..=8);
    let h = rng.random_range(1..=10);
    let gamma = rng.random_range(0.5..=1.0);
    random_dataset(1_000 + i, d, n, h, gamma, true)
}

fn loto_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let ds = random_instance(i);
        for &l in &CV_LAMBDAS {
            let fast = lstd_loto_cv(&ds, l, ds.gamma(), RIDGE).expect("efficient LOTO-CV");
            let slow = naive_loto_cv(&ds, l, ds.gamma(), RIDGE).expect("naive LOTO-CV");
            for (a, b) in fast.errors.iter().zip(&slow.errors) {
                worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("max relative deviation {worst:.3e} (≤ 1e-8), {:.2} s (< 30 s)", elapsed.as_secs_f64()),
    )
}

fn warm_start_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let ds = random_instance(i);
        let a0_inv = invert(&build_system(&ds, 0.0, ds.gamma(), RIDGE).unwrap().a).unwrap();
        for &l in &CV_LAMBDAS {
            let warm = warm_start_inverse(&a0_inv, &ds, l, ds.gamma()).expect("warm start");
            let direct = invert(&build_system(&ds, l, ds.gamma(), RIDGE).unwrap().a).unwrap();
            worst = worst.max(relative_frobenius_error(&warm, &direct));
        }
    }
    outcome(worst <= 1e-7, format!("max relative Frobenius error {worst:.3e} (≤ 1e-7)"))
}

fn random_vector(rng: &mut impl Rng, d: usize, scale: f64) -> Vector {
    Vector::from_vec((0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
}

fn rsm_correctness() -> Outcome {
    let mut worst_rsm: f64 = 0.0;
    let mut worst_round_trip: f64 = 0.0;
    for case in 0..100 {
        let mut rng = stream_rng(0x5e_aa, case);
        let d = rng.random_range(1..=8);
        let mut m = Matrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = rng.random_range(-1.0..1.0);
            }
            m[(r, r)] += d as f64 + 1.0;
        }
        let m_inv = invert(&m).unwrap();
        let steps = rng.random_range(1..=10);
        let pairs: Vec<(Vector, Vector)> = (0..steps)
            .map(|_| (random_vector(&mut rng, d, 1.0), random_vector(&mut rng, d, 0.5)))
            .collect();
        let mut direct = m.clone();
        for (u, v) in &pairs {
            direct.add_outer(1.0, u.as_slice(), v.as_slice());
        }
        let recursive = recursive_sherman_morrison(&m_inv, pairs.iter().map(|(u, v)| (u, v))).expect("RSM");
        worst_rsm = worst_rsm.max(relative_frobenius_error(&recursive, &invert(&direct).unwrap()));

        let (u, v) = &pairs[0];
        let up = sherman_morrison(&m_inv, u, v).unwrap();
        let back = sherman_morrison(&up, &u.scaled(-1.0), v).unwrap();
        worst_round_trip = worst_round_trip.max(relative_frobenius_error(&back, &m_inv));
    }
    outcome(
        worst_rsm <= 1e-9 && worst_round_trip <= 1e-9,
        format!("recursive vs direct {worst_rsm:.3e}, round trip {worst_round_trip:.3e} (both ≤ 1e-9)"),
    )
}

fn regression_equivalence() -> Outcome {
    let ds = generate(&EnvConfig::new(EnvId::RandomWalk, 50, 4_000).with_horizon(200)).unwrap();
    let terminated = ds.trajectories().iter().all(|t| t.is_terminated());
    let theta = lstd(&ds, 1.0, ds.gamma(), RIDGE).unwrap();
    let reg = Vector::from_vec(monte_carlo_regression(&ds, RIDGE));
    let rel = theta.sub(&reg).norm_inf() / reg.norm_inf();
    outcome(
        terminated && rel <= 1e-8,
        format!("relative difference {rel:.3e} (≤ 1e-8), every episode terminated: {terminated}"),
    )
}

fn random_walk_trials(n: usize, trials: u64, base: u64) -> Vec<Dataset> {
    (0..trials)
        .map(|t| generate(&EnvConfig::new(EnvId::RandomWalk, n, base + t)).unwrap())
        .collect()
}

fn selection_quality() -> Outcome {
    let start = Instant::now();
    let grid = default_grid();
    let oracle = random_walk_true_values(EnvId::RandomWalk.default_horizon()).unwrap();
    let datasets = random_walk_trials(100, 20, 5_000);
    let mut allstd_scores = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut same_lambda = true;
    for ds in &datasets {
        let fast = allstd(ds, &grid, ds.gamma(), RIDGE).unwrap();
        let slow = naive_cv_lstd(ds, &grid, ds.gamma(), RIDGE).unwrap();
        let a = oracle_root_msve(&fast.theta, &oracle).unwrap();
        let b = oracle_root_msve(&slow.theta, &oracle).unwrap();
        same_lambda &= fast.lambda() == slow.lambda();
        max_gap = max_gap.max((a - b).abs());
        allstd_scores.push(a);
    }
    let summary = best_worst_fixed_lambda(&datasets, &grid, &oracle, RIDGE, DEFAULT_RHO).unwrap();
    let best = summary.lstd_mean[summary.lstd_best()];
    let mean = allstd_scores.iter().sum::<f64>() / allstd_scores.len() as f64;
    let ratio = mean / best;
    let elapsed = start.elapsed();
    outcome(
        ratio <= 1.05 && same_lambda && max_gap <= 1e-8 && elapsed < Duration::from_secs(300),
        format!(
            "allstd mean {mean:.5} / best fixed λ={} mean {best:.5} = {ratio:.4} (≤ 1.05); \
             same λ as naive: {same_lambda}, max root MSVE gap {max_gap:.1e} (≤ 1e-8); {:.1} s",
            grid[summary.lstd_best()],
            elapsed.as_secs_f64()
        ),
    )
}

fn speedup_at(n: usize) -> f64 {
    let grid = default_grid();
    let ds = generate(&EnvConfig::new(EnvId::RandomWalk, n, 6_000).with_horizon(20)).unwrap();
    let workload = Workload {
        n,
        horizon: 20,
        d: ds.dim(),
        k: grid.len(),
    };
    let fast = time_method("allstd", workload, 5, || allstd(&ds, &grid, ds.gamma(), RIDGE).unwrap());
    let slow = time_method("naive-cv", workload, 5, || naive_cv_lstd(&ds, &grid, ds.gamma(), RIDGE).unwrap());
    slow.median_seconds / fast.median_seconds
}

fn speedup() -> Outcome {
    let small = speedup_at(25);
    let large = speedup_at(100);
    outcome(
        large >= 5.0 && large > small,
        format!("naive/allstd time ratio {small:.1}x at n=25, {large:.1}x at n=100 (≥ 5, increasing)"),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn consistency_trend() -> Outcome {
    let grid = default_grid();
    let oracle = random_walk_true_values(EnvId::RandomWalk.default_horizon()).unwrap();
    let mut gaps = Vec::new();
    for n in [10, 50, 250] {
        let datasets = random_walk_trials(n, 20, 7_000);
        let summary = best_worst_fixed_lambda(&datasets, &grid, &oracle, RIDGE, DEFAULT_RHO).unwrap();
        let per_trial: Vec<f64> = datasets
            .iter()
            .zip(summary.per_trial_best())
            .map(|(ds, best)| {
                let sel = allstd(ds, &grid, ds.gamma(), RIDGE).unwrap();
                oracle_root_msve(&sel.theta, &oracle).unwrap() - best
            })
            .collect();
        gaps.push(median(per_trial));
    }
    let pass = gaps.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        pass,
        format!(
            "median gap to per-trial best λ: n=10 {:.5}, n=50 {:.5}, n=250 {:.5} (non-increasing)",
            gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn chosen_lambdas(env: EnvId, n: usize, trials: u64) -> Vec<f64> {
    let grid = default_grid();
    (0..trials)
        .map(|t| {
            let ds = generate(&EnvConfig::new(env, n, 8_000 + t)).unwrap();
            allstd(&ds, &grid, ds.gamma(), RIDGE).unwrap().lambda()
        })
        .collect()
}

fn domain_qualitative() -> Outcome {
    let trials = 20;
    let count = |ls: &[f64], pred: fn(f64) -> bool| ls.iter().filter(|l| pred(**l)).count();
    let rw = count(&chosen_lambdas(EnvId::RandomWalk, 10, trials), |l| l < 1.0);
    let game = count(&chosen_lambdas(EnvId::Game2048, 10, trials), |l| l < 1.0);
    let car = count(&chosen_lambdas(EnvId::MountainCar, 10, trials), |l| l >= 0.8);
    let majority = trials as usize / 2 + 1;
    outcome(
        rw >= majority && game >= majority && car >= majority,
        format!("n=10: random walk λ*<1 in {rw}/20, 2048 λ*<1 in {game}/20, mountain car λ*≥0.8 in {car}/20"),
    )
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_allstd"))
}

fn run_cli(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Command::new(bin())
        .args(args)
        .arg("--out")
        .arg(out)
        .env("ALLSTD_THREADS", "1")
        .output()
        .expect("spawn allstd");
    assert!(status.status.success(), "allstd {args:?}: {}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out).unwrap()
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("allstd-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = |name: &str| dir.join(name);
    let data = p("data.jsonl");
    let data_str = data.to_str().unwrap().to_string();
    let run_csv = p("run.csv");
    let run_csv_str = run_csv.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("gen", vec!["gen", "--env", "random-walk", "--n", "10", "--horizon", "20", "--seed", "7"]
            .into_iter()
            .map(String::from)
            .collect()),
        ("run", vec![
            "run", "--env", "mountain-car", "--n", "5,10", "--trials", "3", "--seed", "3", "--method",
            "allstd,naive-cv,lstd-fixed,rlstd-fixed", "--lambda", "0.5", "--threads", "1", "--omit-timing",
        ]
        .into_iter()
        .map(String::from)
        .collect()),
        ("run --data", vec!["run", "--data", &data_str, "--n", "10", "--threads", "1", "--omit-timing"]
            .into_iter()
            .map(String::from)
            .collect()),
        ("bench", vec!["bench", "--env", "random-walk", "--n", "10,20", "--seed", "5", "--omit-timing"]
            .into_iter()
            .map(String::from)
            .collect()),
        ("plot", vec!["plot", "--data", &run_csv_str].into_iter().map(String::from).collect()),
    ];
    let mut results = Vec::new();
    for (name, args) in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first_path = if *name == "gen" { data.clone() } else if *name == "run" { run_csv.clone() } else { p("first") };
        let first = run_cli(&args, &first_path);
        let second = run_cli(&args, &p("second"));
        results.push((name.to_string(), !first.is_empty() && first == second));
    }
    let _ = std::fs::remove_dir_all(&dir);
    let pass = results.iter().all(|(_, ok)| *ok);
    let detail = results
        .iter()
        .map(|(name, ok)| format!("{name}: {}", if *ok { "identical" } else { "DIFFERS" }))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("efficient LOTO-CV equals naive LOTO-CV", loto_oracle_equivalence),
        ("warm-started inverse equals direct inverse", warm_start_correctness),
        ("recursive rank-one updates equal direct inversion", rsm_correctness),
        ("LSTD(1) equals regression on Monte-Carlo returns", regression_equivalence),
        ("selection quality on the random walk", selection_quality),
        ("speedup over naive cross-validation", speedup),
        ("gap to the best fixed λ shrinks with n", consistency_trend),
        ("selected λ per domain", domain_qualitative),
        ("byte-identical CLI output with a fixed seed", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
