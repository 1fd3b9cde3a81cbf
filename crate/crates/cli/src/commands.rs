use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use allstd_core::allstd::{allstd, default_grid, naive_cv_lstd, validate_grid};
use allstd_core::envs::{build_oracle_with_gamma, generate, EnvConfig, EnvId, EnvOracle, OracleBudget};
use allstd_core::eval::{oracle_root_msve, time_method, Workload, DEFAULT_RHO};
use allstd_core::trajectory::{read_jsonl, write_jsonl};
use allstd_core::lstd::{lstd, rlstd};
use allstd_core::{Dataset, Vector};
use rayon::prelude::*;

use crate::args::{BenchArgs, GenArgs, Method, RunArgs, Solver, Source};
use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, float, opt_float, sink};

pub const RUN_HEADER: [&str; 7] = ["trial", "method", "n", "lambda_used", "score", "root_msve", "seconds"];
pub const BENCH_HEADER: [&str; 6] = ["method", "n", "H", "d", "k", "median_seconds"];

pub fn gen(args: &GenArgs) -> CliResult<()> {
    let mut config = EnvConfig::new(args.env, args.n, args.seed);
    if let Some(h) = args.horizon {
        config = config.with_horizon(h);
    }
    let ds = generate(&config).map_err(|e| CliError::from_core("generating data", e))?;
    let mut out = sink(args.out.as_deref())?;
    write_jsonl(&ds, &mut out).map_err(|e| CliError::from_core("writing trajectories", e))?;
    out.flush().map_err(|e| CliError::Io(e.to_string()))?;
    let summary = format!("n={} H={} d={}", ds.len(), ds.horizon(), ds.dim());
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file)).map_err(|e| CliError::from_core(&path.display().to_string(), e))
}

fn grid(solver: &Solver) -> CliResult<Vec<f64>> {
    let grid = solver.lambdas.clone().unwrap_or_else(default_grid);
    validate_grid(&grid).map_err(|e| CliError::from_core("--lambdas", e))?;
    Ok(grid)
}

/// Trajectories for every trial, plus what is known about their domain.
struct Plan {
    env: Option<EnvId>,
    horizon: usize,
    loaded: Option<Dataset>,
    seed: u64,
}

impl Plan {
    fn new(source: &Source, sizes: &[usize]) -> CliResult<Self> {
        if let Some(path) = &source.data {
            let ds = load_dataset(path)?;
            if let Some(&n) = sizes.iter().find(|&&n| n > ds.len()) {
                return Err(CliError::Usage(format!(
                    "--n {n} exceeds the {} trajectories in {}",
                    ds.len(),
                    path.display()
                )));
            }
            return Ok(Plan {
                env: ds.env().and_then(|e| e.parse().ok()),
                horizon: ds.horizon(),
                loaded: Some(ds),
                seed: source.seed,
            });
        }
        let env = source.env.unwrap_or(EnvId::RandomWalk);
        Ok(Plan {
            env: Some(env),
            horizon: source.horizon.unwrap_or(env.default_horizon()),
            loaded: None,
            seed: source.seed,
        })
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    fn dataset(&self, trial: usize, n: usize) -> CliResult<Dataset> {
        match &self.loaded {
            Some(ds) => Ok(ds.truncated(n)),
            None => {
                let env = self.env.expect("generated plans know their domain");
                let config = EnvConfig::new(env, n, self.trial_seed(trial)).with_horizon(self.horizon);
                generate(&config).map_err(|e| CliError::from_core("generating data", e))
            }
        }
    }

    fn oracle(&self, gamma: f64) -> CliResult<Option<EnvOracle>> {
        match self.env {
            Some(env) => build_oracle_with_gamma(env, self.horizon, gamma, self.seed, OracleBudget::default())
                .map(Some)
                .map_err(|e| CliError::from_core("building the evaluation oracle", e)),
            None => Ok(None),
        }
    }
}

/// One CSV row of `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub trial: usize,
    pub method: &'static str,
    pub n: usize,
    pub lambda_used: Option<f64>,
    pub score: Option<f64>,
    pub root_msve: Option<f64>,
    pub seconds: f64,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

struct TrialContext<'a> {
    grid: &'a [f64],
    fixed: Vec<f64>,
    gamma: Option<f64>,
    ridge: f64,
    methods: &'a [Method],
    oracle: Option<&'a EnvOracle>,
}

impl TrialContext<'_> {
    fn rmsve(&self, theta: &Vector) -> CliResult<Option<f64>> {
        match self.oracle {
            Some(o) => oracle_root_msve(theta, o)
                .map(Some)
                .map_err(|e| CliError::from_core("evaluating", e)),
            None => Ok(None),
        }
    }

    fn rows(&self, trial: usize, ds: &Dataset) -> CliResult<Vec<RunRow>> {
        let gamma = self.gamma.unwrap_or(ds.gamma());
        let n = ds.len();
        let mut rows = Vec::new();
        for &method in self.methods {
            let ctx = |lambda: Option<f64>| match lambda {
                Some(l) => format!("trial {trial}, method {}, n {n}, λ {l}", method.label()),
                None => format!("trial {trial}, method {}, n {n}", method.label()),
            };
            match method {
                Method::Allstd | Method::NaiveCv => {
                    let (sel, seconds) = timed(|| {
                        if method == Method::Allstd {
                            allstd(ds, self.grid, gamma, self.ridge)
                        } else {
                            naive_cv_lstd(ds, self.grid, gamma, self.ridge)
                        }
                    });
                    let sel = sel.map_err(|e| CliError::from_core(&ctx(None), e))?;
                    rows.push(RunRow {
                        trial,
                        method: method.label(),
                        n,
                        lambda_used: Some(sel.lambda()),
                        score: Some(sel.score()),
                        root_msve: self.rmsve(&sel.theta)?,
                        seconds,
                    });
                }
                Method::LstdFixed | Method::RlstdFixed => {
                    for &l in &self.fixed {
                        let (theta, seconds) = timed(|| {
                            if method == Method::LstdFixed {
                                lstd(ds, l, gamma, self.ridge)
                            } else {
                                rlstd(ds, l, gamma, DEFAULT_RHO)
                            }
                        });
                        let theta = theta.map_err(|e| CliError::from_core(&ctx(Some(l)), e))?;
                        rows.push(RunRow {
                            trial,
                            method: method.label(),
                            n,
                            lambda_used: Some(l),
                            score: None,
                            root_msve: self.rmsve(&theta)?,
                            seconds,
                        });
                    }
                }
                Method::KxLstd | Method::KxRlstd => {
                    return Err(CliError::Usage(format!(
                        "{} is a timing reference; use it with `bench`",
                        method.label()
                    )))
                }
            }
        }
        Ok(rows)
    }
}

/// Computes every row of `run`, ordered by trial, then n, then method.
pub fn run_rows(args: &RunArgs) -> CliResult<Vec<RunRow>> {
    let grid = grid(&args.solver)?;
    let plan = Plan::new(&args.source, &args.n)?;
    let trials = if plan.loaded.is_some() { 1 } else { args.trials };
    let oracle_gamma = args.solver.gamma.or(plan.env.map(EnvId::gamma));
    let oracle = match oracle_gamma {
        Some(g) => plan.oracle(g)?,
        None => None,
    };
    let ctx = TrialContext {
        grid: &grid,
        fixed: args.lambda.map_or_else(|| grid.clone(), |l| vec![l]),
        gamma: args.solver.gamma,
        ridge: args.solver.ridge,
        methods: &args.method,
        oracle: oracle.as_ref(),
    };
    let max_n = *args.n.iter().max().expect("clap requires at least one n");

    let trial_rows = |trial: usize| -> CliResult<Vec<RunRow>> {
        let full = plan.dataset(trial, max_n)?;
        let mut rows = Vec::new();
        for &n in &args.n {
            rows.extend(ctx.rows(trial, &full.truncated(n))?);
        }
        Ok(rows)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    let per_trial: Vec<Vec<RunRow>> = pool.install(|| (0..trials).into_par_iter().map(trial_rows).collect::<CliResult<_>>())?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    let rows = run_rows(args)?;
    let mut w = csv_writer(sink(args.out.as_deref())?);
    w.write_record(RUN_HEADER)?;
    for r in rows {
        let seconds = if args.omit_timing { String::new() } else { float(r.seconds) };
        w.write_record([
            r.trial.to_string(),
            r.method.to_string(),
            r.n.to_string(),
            opt_float(r.lambda_used),
            opt_float(r.score),
            opt_float(r.root_msve),
            seconds,
        ])?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// One CSV row of `bench`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub workload: Workload,
    pub median_seconds: f64,
}

fn bench_once(method: Method, ds: &Dataset, grid: &[f64], fixed: Option<f64>, gamma: f64, ridge: f64) -> allstd_core::Result<()> {
    match method {
        Method::Allstd => allstd(ds, grid, gamma, ridge).map(drop),
        Method::NaiveCv => naive_cv_lstd(ds, grid, gamma, ridge).map(drop),
        Method::KxLstd => grid.iter().try_for_each(|&l| lstd(ds, l, gamma, ridge).map(drop)),
        Method::KxRlstd => grid.iter().try_for_each(|&l| rlstd(ds, l, gamma, DEFAULT_RHO).map(drop)),
        Method::LstdFixed => lstd(ds, fixed.unwrap_or(0.0), gamma, ridge).map(drop),
        Method::RlstdFixed => rlstd(ds, fixed.unwrap_or(0.0), gamma, DEFAULT_RHO).map(drop),
    }
}

/// Times every method at every n, one timed region at a time.
pub fn bench_rows(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    let grid = grid(&args.solver)?;
    let fixed_needed = args.method.iter().any(|m| matches!(m, Method::LstdFixed | Method::RlstdFixed));
    if fixed_needed && args.lambda.is_none() {
        return Err(CliError::Usage("lstd-fixed and rlstd-fixed need --lambda".into()));
    }
    let plan = Plan::new(&args.source, &args.n)?;
    let mut rows = Vec::new();
    for &n in &args.n {
        let ds = plan.dataset(0, n)?;
        let gamma = args.solver.gamma.unwrap_or(ds.gamma());
        for &method in &args.method {
            let k = match method {
                Method::LstdFixed | Method::RlstdFixed => 1,
                _ => grid.len(),
            };
            bench_once(method, &ds, &grid, args.lambda, gamma, args.solver.ridge)
                .map_err(|e| CliError::from_core(&format!("method {}, n {n}", method.label()), e))?;
            let workload = Workload {
                n,
                horizon: ds.horizon(),
                d: ds.dim(),
                k,
            };
            let timing = time_method(method.label(), workload, args.reps, || {
                bench_once(method, &ds, &grid, args.lambda, gamma, args.solver.ridge)
            });
            rows.push(BenchRow {
                method: method.label(),
                workload,
                median_seconds: timing.median_seconds,
            });
        }
    }
    Ok(rows)
}

pub fn bench(args: &BenchArgs) -> CliResult<()> {
    let rows = bench_rows(args)?;
    let mut w = csv_writer(sink(args.out.as_deref())?);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        let seconds = if args.omit_timing { String::new() } else { float(r.median_seconds) };
        w.write_record([
            r.method.to_string(),
            r.workload.n.to_string(),
            r.workload.horizon.to_string(),
            r.workload.d.to_string(),
            r.workload.k.to_string(),
            seconds,
        ])?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
