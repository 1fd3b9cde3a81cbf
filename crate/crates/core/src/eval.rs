//! Root MSVE against an oracle, fixed-λ baselines, and wall-clock timing.

use std::time::Instant;

use crate::envs::{EnvOracle, EvalState};
use crate::error::{Error, Result};
use crate::linalg::{dot, Vector};
use crate::lstd::{lstd, rlstd};
use crate::trajectory::Dataset;

/// RLSTD's initial inverse is (1/ρ)I with this ρ unless told otherwise.
pub const DEFAULT_RHO: f64 = 1.0;

/// One evaluated fit: a CSV row of a benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    /// `None` for methods that choose λ themselves and failed to.
    pub lambda_used: Option<f64>,
    pub score: Option<f64>,
    pub root_msve: Option<f64>,
    pub train_seconds: f64,
    pub n: usize,
    pub seed: u64,
}

/// sqrt(Σ_s w(s) (ν(s) − φ(s)ᵀθ)²) over `eval_states`.
pub fn root_msve(theta: &Vector, oracle: &EnvOracle, eval_states: &[EvalState]) -> Result<f64> {
    let mut total = 0.0;
    for s in eval_states {
        if s.features.len() != theta.dim() {
            return Err(Error::DimensionMismatch {
                expected: theta.dim(),
                found: s.features.len(),
            });
        }
        let value = oracle
            .true_value(&s.key)
            .ok_or_else(|| Error::MissingOracleValue { state: s.key.clone() })?;
        let err = value - dot(&s.features, theta.as_slice());
        total += s.weight * err * err;
    }
    Ok(total.sqrt())
}

/// Root MSVE over the oracle's own weighted states.
pub fn oracle_root_msve(theta: &Vector, oracle: &EnvOracle) -> Result<f64> {
    root_msve(theta, oracle, &oracle.eval_states())
}

/// Mean root MSVE per λ for LSTD and RLSTD over a set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedLambdaSummary {
    pub lambdas: Vec<f64>,
    /// `[trial][λ]`
    pub lstd_per_trial: Vec<Vec<f64>>,
    pub rlstd_per_trial: Vec<Vec<f64>>,
    pub lstd_mean: Vec<f64>,
    pub rlstd_mean: Vec<f64>,
}

impl FixedLambdaSummary {
    pub fn lstd_best(&self) -> usize {
        argmin(&self.lstd_mean)
    }

    pub fn lstd_worst(&self) -> usize {
        argmax(&self.lstd_mean)
    }

    pub fn rlstd_best(&self) -> usize {
        argmin(&self.rlstd_mean)
    }

    pub fn rlstd_worst(&self) -> usize {
        argmax(&self.rlstd_mean)
    }

    /// min over λ of each trial's LSTD root MSVE.
    pub fn per_trial_best(&self) -> Vec<f64> {
        self.lstd_per_trial
            .iter()
            .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    }
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x < xs[best] {
            best = i;
        }
    }
    best
}

fn argmax(xs: &[f64]) -> usize {
    let mut worst = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[worst] {
            worst = i;
        }
    }
    worst
}

fn column_means(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64)
        .collect()
}

/// Runs LSTD and RLSTD for every λ on every trial dataset.
///
/// A fit that fails numerically scores `+inf` for that trial.
pub fn best_worst_fixed_lambda(
    datasets: &[Dataset],
    lambdas: &[f64],
    oracle: &EnvOracle,
    ridge: f64,
    rho: f64,
) -> Result<FixedLambdaSummary> {
    if datasets.len() < 2 {
        return Err(Error::InsufficientData { n: datasets.len() });
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    let states = oracle.eval_states();
    let score = |fit: Result<Vector>| -> Result<f64> {
        match fit {
            Ok(theta) => root_msve(&theta, oracle, &states),
            Err(e) if e.is_singular() => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut lstd_rows = Vec::with_capacity(datasets.len());
    let mut rlstd_rows = Vec::with_capacity(datasets.len());
    for ds in datasets {
        let gamma = ds.gamma();
        let mut lrow = Vec::with_capacity(lambdas.len());
        let mut rrow = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            lrow.push(score(lstd(ds, l, gamma, ridge))?);
            rrow.push(score(rlstd(ds, l, gamma, rho))?);
        }
        lstd_rows.push(lrow);
        rlstd_rows.push(rrow);
    }
    Ok(FixedLambdaSummary {
        lambdas: lambdas.to_vec(),
        lstd_mean: column_means(&lstd_rows, lambdas.len()),
        rlstd_mean: column_means(&rlstd_rows, lambdas.len()),
        lstd_per_trial: lstd_rows,
        rlstd_per_trial: rlstd_rows,
    })
}

/// Workload shape recorded next to a timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workload {
    pub n: usize,
    pub horizon: usize,
    pub d: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub method: String,
    pub workload: Workload,
    pub median_seconds: f64,
    pub samples: Vec<f64>,
}

pub const MIN_REPS: usize = 5;

/// Median wall-clock seconds of `f` over `reps` (at least 5) runs after one
/// untimed warm-up run.
pub fn time_method<T, F>(method: &str, workload: Workload, reps: usize, mut f: F) -> Timing
where
    F: FnMut() -> T,
{
    std::hint::black_box(f());
    let reps = reps.max(MIN_REPS);
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64().max(1e-9)
        })
        .collect();
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if reps % 2 == 1 {
        sorted[reps / 2]
    } else {
        0.5 * (sorted[reps / 2 - 1] + sorted[reps / 2])
    };
    samples.shrink_to_fit();
    Timing {
        method: method.to_string(),
        workload,
        median_seconds: median,
        samples,
    }
}
