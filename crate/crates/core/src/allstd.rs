//! λ selection over a finite grid by leave-one-trajectory-out scores.
//!
//! [`allstd`] inverts the λ = 0 system once and reaches every A_λ⁻¹ through
//! rank-one warm starts, then scores each λ with the efficient folds.
//! [`naive_cv_lstd`] produces the same selection by brute-force refitting.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::loto::{accumulate_b, dataset_returns, efficient_folds, mean_score, naive_loto_cv};
use crate::lstd::{build_system, check_lambda, warm_start_from_terms, TrajectoryTerms};
use crate::trajectory::Dataset;

/// {0.0, 0.1, …, 0.9, 0.95, 1.0}
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    grid.extend([0.95, 1.0]);
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub lambdas: Vec<f64>,
    /// Mean held-out error per λ; `+inf` when any fold failed.
    pub scores: Vec<f64>,
    /// Index of the chosen λ in `lambdas`.
    pub chosen: usize,
    pub theta: Vector,
    pub fold_failures: usize,
    /// λ values whose warm start hit a singular intermediate and were
    /// inverted directly instead.
    pub warm_start_fallbacks: usize,
}

impl LambdaSelection {
    pub fn lambda(&self) -> f64 {
        self.lambdas[self.chosen]
    }

    pub fn score(&self) -> f64 {
        self.scores[self.chosen]
    }
}

pub fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Index of the smallest score; ties go to the smaller λ (earlier index).
pub fn select_index(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s < scores[best] {
            best = i;
        }
    }
    best
}

fn check_inputs(dataset: &Dataset, lambdas: &[f64]) -> Result<()> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientData { n: dataset.len() });
    }
    validate_grid(lambdas)
}

pub fn allstd(dataset: &Dataset, lambdas: &[f64], gamma: f64, ridge: f64) -> Result<LambdaSelection> {
    check_inputs(dataset, lambdas)?;
    let d = dataset.dim();
    let a0 = build_system(dataset, 0.0, gamma, ridge)?;
    let a0_inv = linalg::invert(&a0.a)?;
    let returns = dataset_returns(dataset, gamma);

    let mut scores = Vec::with_capacity(lambdas.len());
    let mut thetas = Vec::with_capacity(lambdas.len());
    let mut fold_failures = 0;
    let mut warm_start_fallbacks = 0;
    for &lambda in lambdas {
        let terms: Vec<_> = dataset
            .trajectories()
            .iter()
            .map(|t| TrajectoryTerms::new(t, lambda, gamma))
            .collect();
        let b = accumulate_b(d, &terms);
        let mut a = Matrix::scaled_identity(d, ridge);
        for tt in &terms {
            tt.accumulate_a(&mut a);
        }
        let a_inv: Matrix = match warm_start_from_terms(&a0_inv, &terms) {
            Ok(m) => m,
            Err(e) if e.is_singular() => {
                warm_start_fallbacks += 1;
                linalg::invert(&a)?
            }
            Err(e) => return Err(e),
        };
        let (errors, failures) = efficient_folds(&a, &a_inv, &b, &terms, &returns)?;
        fold_failures += failures;
        scores.push(mean_score(&errors));
        thetas.push(Vector::from_vec(a_inv.mul_slice(&b)));
    }

    let chosen = select_index(&scores);
    Ok(LambdaSelection {
        lambdas: lambdas.to_vec(),
        theta: thetas.swap_remove(chosen),
        scores,
        chosen,
        fold_failures,
        warm_start_fallbacks,
    })
}

/// Same selection by running the naive LOTO-CV for each λ.
pub fn naive_cv_lstd(dataset: &Dataset, lambdas: &[f64], gamma: f64, ridge: f64) -> Result<LambdaSelection> {
    check_inputs(dataset, lambdas)?;
    let mut scores = Vec::with_capacity(lambdas.len());
    let mut thetas = Vec::with_capacity(lambdas.len());
    let mut fold_failures = 0;
    for &lambda in lambdas {
        let res = naive_loto_cv(dataset, lambda, gamma, ridge)?;
        fold_failures += res.fold_failures;
        scores.push(res.score());
        thetas.push(res.theta);
    }
    let chosen = select_index(&scores);
    Ok(LambdaSelection {
        lambdas: lambdas.to_vec(),
        theta: thetas.swap_remove(chosen),
        scores,
        chosen,
        fold_failures,
        warm_start_fallbacks: 0,
    })
}
