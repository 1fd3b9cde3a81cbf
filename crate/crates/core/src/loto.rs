//! Leave-one-trajectory-out cross-validation for a fixed λ.
//!
//! The efficient path inverts A_λ once and removes each trajectory's
//! rank-one terms from the inverse with Sherman-Morrison, so all n held-out
//! solutions cost O(d³ + nHd²) in total. The naive path rebuilds and
//! re-solves LSTD on every reduced dataset and serves as the oracle.

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, rank_one_update_in_place, Matrix, RankOneWorkspace, Vector};
use crate::lstd::{build_system, check_lambda, lstd_solve, TrajectoryTerms};
use crate::trajectory::{monte_carlo_returns, Dataset, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct LotoResult {
    /// Full-data θ_λ.
    pub theta: Vector,
    /// Held-out mean squared return error per trajectory; `+inf` marks a
    /// fold whose reduced system was singular.
    pub errors: Vec<f64>,
    pub lambda: f64,
    pub fold_failures: usize,
}

impl LotoResult {
    /// Mean of the per-trajectory errors.
    pub fn score(&self) -> f64 {
        mean_score(&self.errors)
    }
}

pub(crate) fn mean_score(errors: &[f64]) -> f64 {
    errors.iter().sum::<f64>() / errors.len() as f64
}

/// C₍ᵢ₎⁻¹: removes trajectory `traj` from A⁻¹ with updates
/// u_t = z_t, v_t = γx_{t+1} − x_t.
pub fn downdate_inverse(a_inv: &Matrix, traj: &Trajectory, lambda: f64, gamma: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    check_dim(a_inv.rows(), traj.dim())?;
    let terms = TrajectoryTerms::new(traj, lambda, gamma);
    let mut out = a_inv.clone();
    downdate_in_place(&mut out, &terms, &mut RankOneWorkspace::new(traj.dim()), &mut Vec::new())?;
    Ok(out)
}

fn downdate_in_place(
    m: &mut Matrix,
    terms: &TrajectoryTerms<'_>,
    ws: &mut RankOneWorkspace,
    v: &mut Vec<f64>,
) -> Result<()> {
    v.resize(terms.traj.dim(), 0.0);
    for t in 0..terms.len {
        for (vi, wi) in v.iter_mut().zip(terms.w(t)) {
            *vi = -wi;
        }
        rank_one_update_in_place(m, terms.z(t), v, ws)
            .map_err(|denominator| Error::SingularUpdate { step: t, denominator })?;
    }
    if !m.is_finite() {
        return Err(Error::SingularUpdate {
            step: terms.len,
            denominator: f64::NAN,
        });
    }
    Ok(())
}

/// y₍ᵢ₎ = b − Σ_t z_t r_t.
pub fn loto_vector(b: &Vector, traj: &Trajectory, lambda: f64, gamma: f64) -> Result<Vector> {
    check_lambda(lambda)?;
    check_dim(b.dim(), traj.dim())?;
    let terms = TrajectoryTerms::new(traj, lambda, gamma);
    Ok(Vector::from_vec(held_out_vector(b.as_slice(), &terms)))
}

fn held_out_vector(b: &[f64], terms: &TrajectoryTerms<'_>) -> Vec<f64> {
    let mut own = vec![0.0; b.len()];
    terms.accumulate_b(&mut own);
    b.iter().zip(&own).map(|(full, mine)| full - mine).collect()
}

/// (1/H)·Σ over real steps of (x_tᵀθ − G_t)².
///
/// Padded steps would contribute (0 − 0)², so dividing by the full horizon
/// weights every visited step equally across trajectories of any length.
pub fn loto_error(theta_i: &Vector, traj: &Trajectory, gamma: f64) -> Result<f64> {
    check_dim(theta_i.dim(), traj.dim())?;
    let returns = monte_carlo_returns(traj, gamma);
    return_error(theta_i.as_slice(), traj, &returns)
}

fn return_error(theta: &[f64], traj: &Trajectory, returns: &[f64]) -> Result<f64> {
    let len = traj.effective_len();
    if len == 0 {
        return Err(Error::EmptyTrajectory { id: traj.id() });
    }
    let sum: f64 = (0..len)
        .map(|t| {
            let e = dot(traj.feature(t), theta) - returns[t];
            e * e
        })
        .sum();
    Ok(sum / traj.horizon() as f64)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_folds(dataset: &Dataset) -> Result<()> {
    if dataset.len() < 2 {
        return Err(Error::InsufficientData { n: dataset.len() });
    }
    if let Some(t) = dataset.trajectories().iter().find(|t| t.effective_len() == 0) {
        return Err(Error::EmptyTrajectory { id: t.id() });
    }
    Ok(())
}

/// Per-trajectory Monte-Carlo returns; independent of λ, so callers scoring
/// several λ values compute them once.
pub(crate) fn dataset_returns(dataset: &Dataset, gamma: f64) -> Vec<Vec<f64>> {
    dataset
        .trajectories()
        .iter()
        .map(|t| monte_carlo_returns(t, gamma))
        .collect()
}

/// y − C₍ᵢ₎θ with C₍ᵢ₎θ = Aθ − Σ_t z_t (w_tᵀθ) over the held-out steps.
fn fold_residual(a: &Matrix, y: &[f64], theta: &[f64], tt: &TrajectoryTerms<'_>) -> Vec<f64> {
    let mut r: Vec<f64> = y.iter().zip(a.mul_slice(theta)).map(|(y, at)| y - at).collect();
    for t in 0..tt.len {
        axpy(dot(tt.w(t), theta), tt.z(t), &mut r);
    }
    r
}

/// Runs the n held-out folds given the full-data system A, its inverse and b.
/// Returns per-trajectory errors and the number of singular folds.
///
/// Each fold's θ gets two steps of iterative refinement against the explicit
/// fold system, recovering the digits a downdate loses when the remaining
/// data barely span the feature space.
pub(crate) fn efficient_folds(
    a: &Matrix,
    a_inv: &Matrix,
    b: &[f64],
    terms: &[TrajectoryTerms<'_>],
    returns: &[Vec<f64>],
) -> Result<(Vec<f64>, usize)> {
    let d = a_inv.rows();
    let mut ws = RankOneWorkspace::new(d);
    let mut v = Vec::with_capacity(d);
    let mut c_inv = a_inv.clone();
    let mut errors = Vec::with_capacity(terms.len());
    let mut failures = 0;
    for (tt, g) in terms.iter().zip(returns) {
        c_inv.clone_from(a_inv);
        match downdate_in_place(&mut c_inv, tt, &mut ws, &mut v) {
            Ok(()) => {
                let y = held_out_vector(b, tt);
                let mut theta_i = c_inv.mul_slice(&y);
                for _ in 0..2 {
                    let correction = c_inv.mul_slice(&fold_residual(a, &y, &theta_i, tt));
                    axpy(1.0, &correction, &mut theta_i);
                }
                let err = return_error(&theta_i, tt.traj, g)?;
                if err.is_finite() {
                    errors.push(err);
                } else {
                    errors.push(f64::INFINITY);
                    failures += 1;
                }
            }
            Err(e) if e.is_singular() => {
                errors.push(f64::INFINITY);
                failures += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((errors, failures))
}

/// LSTD(λ) plus efficient LOTO-CV errors for every trajectory.
pub fn lstd_loto_cv(dataset: &Dataset, lambda: f64, gamma: f64, ridge: f64) -> Result<LotoResult> {
    check_folds(dataset)?;
    let system = build_system(dataset, lambda, gamma, ridge)?;
    let lu = linalg::Lu::factor(&system.a)?;
    let a_inv = lu.inverse()?;
    let theta = lu.solve(&system.b)?;
    let terms: Vec<_> = dataset
        .trajectories()
        .iter()
        .map(|t| TrajectoryTerms::new(t, lambda, gamma))
        .collect();
    let returns = dataset_returns(dataset, gamma);
    let (errors, fold_failures) = efficient_folds(&system.a, &a_inv, system.b.as_slice(), &terms, &returns)?;
    Ok(LotoResult {
        theta,
        errors,
        lambda,
        fold_failures,
    })
}

/// Reference LOTO-CV: rebuilds and re-solves LSTD without each trajectory.
pub fn naive_loto_cv(dataset: &Dataset, lambda: f64, gamma: f64, ridge: f64) -> Result<LotoResult> {
    check_folds(dataset)?;
    let theta = lstd_solve(&build_system(dataset, lambda, gamma, ridge)?)?;
    let mut errors = Vec::with_capacity(dataset.len());
    let mut fold_failures = 0;
    for (i, traj) in dataset.trajectories().iter().enumerate() {
        let reduced = dataset.without(i);
        match lstd_solve(&build_system(&reduced, lambda, gamma, ridge)?) {
            Ok(theta_i) => errors.push(loto_error(&theta_i, traj, gamma)?),
            Err(e) if e.is_singular() => {
                errors.push(f64::INFINITY);
                fold_failures += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LotoResult {
        theta,
        errors,
        lambda,
        fold_failures,
    })
}

/// b accumulated from per-trajectory terms.
pub(crate) fn accumulate_b(d: usize, terms: &[TrajectoryTerms<'_>]) -> Vec<f64> {
    let mut b = vec![0.0; d];
    for tt in terms {
        tt.accumulate_b(&mut b);
    }
    b
}
