//! LSTD(λ): accumulation of (A_λ, b_λ), the direct solve, the recursive
//! estimator, and the λ = 0 warm start for A_λ⁻¹.

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, rank_one_update_in_place, Matrix, RankOneWorkspace, Vector};
use crate::trajectory::{traces_flat, Dataset, Trajectory};

/// Default ridge added to A so that small-sample systems stay invertible.
pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: Matrix,
    pub b: Vector,
    pub lambda: f64,
    pub gamma: f64,
    pub ridge: f64,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} is outside [0, 1]")));
    }
    Ok(())
}

/// Eligibility traces and TD directions for the real steps of one trajectory.
///
/// Padded steps have `w_t = 0` and `r_t = 0`, so they contribute nothing to
/// any statistic and are dropped here.
pub(crate) struct TrajectoryTerms<'a> {
    pub traj: &'a Trajectory,
    pub len: usize,
    /// len × d
    pub z: Vec<f64>,
    /// len × d, `x_t − γ x_{t+1}`
    pub w: Vec<f64>,
}

impl<'a> TrajectoryTerms<'a> {
    pub fn new(traj: &'a Trajectory, lambda: f64, gamma: f64) -> Self {
        let d = traj.dim();
        let len = traj.effective_len();
        let mut z = traces_flat(traj, lambda * gamma);
        z.truncate(len * d);
        let mut w = vec![0.0; len * d];
        for t in 0..len {
            traj.td_direction(t, gamma, &mut w[t * d..(t + 1) * d]);
        }
        TrajectoryTerms { traj, len, z, w }
    }

    #[inline]
    pub fn z(&self, t: usize) -> &[f64] {
        let d = self.traj.dim();
        &self.z[t * d..(t + 1) * d]
    }

    #[inline]
    pub fn w(&self, t: usize) -> &[f64] {
        let d = self.traj.dim();
        &self.w[t * d..(t + 1) * d]
    }

    /// Σ_t z_t wᵀ_t added into `a`.
    pub fn accumulate_a(&self, a: &mut Matrix) {
        for t in 0..self.len {
            a.add_outer(1.0, self.z(t), self.w(t));
        }
    }

    /// Σ_t z_t r_t added into `b`.
    pub fn accumulate_b(&self, b: &mut [f64]) {
        let rewards = self.traj.rewards();
        for t in 0..self.len {
            if rewards[t] != 0.0 {
                axpy(rewards[t], self.z(t), b);
            }
        }
    }
}

fn check_dataset(dataset: &Dataset) -> Result<usize> {
    let d = dataset.dim();
    for traj in dataset.trajectories() {
        if traj.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: traj.dim(),
            });
        }
    }
    Ok(d)
}

/// A_λ = ridge·I + Σ_i Σ_t z_{i,t} w_{i,t}ᵀ and b_λ = Σ_i Σ_t z_{i,t} r_{i,t}.
pub fn build_system(dataset: &Dataset, lambda: f64, gamma: f64, ridge: f64) -> Result<LinearSystem> {
    check_lambda(lambda)?;
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge = {ridge} must be >= 0")));
    }
    let d = check_dataset(dataset)?;
    let mut a = Matrix::scaled_identity(d, ridge);
    let mut b = vec![0.0; d];
    for traj in dataset.trajectories() {
        let terms = TrajectoryTerms::new(traj, lambda, gamma);
        terms.accumulate_a(&mut a);
        terms.accumulate_b(&mut b);
    }
    Ok(LinearSystem {
        a,
        b: Vector::from_vec(b),
        lambda,
        gamma,
        ridge,
    })
}

/// θ_λ = A_λ⁻¹ b_λ.
pub fn lstd_solve(system: &LinearSystem) -> Result<Vector> {
    linalg::solve(&system.a, &system.b)
}

/// Convenience: build and solve in one call.
pub fn lstd(dataset: &Dataset, lambda: f64, gamma: f64, ridge: f64) -> Result<Vector> {
    lstd_solve(&build_system(dataset, lambda, gamma, ridge)?)
}

/// Recursive LSTD(λ): maintains Â⁻¹ from (1/ρ)I by one Sherman-Morrison
/// update per transition, trajectories and steps in ascending order.
pub fn rlstd(dataset: &Dataset, lambda: f64, gamma: f64, rho: f64) -> Result<Vector> {
    check_lambda(lambda)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be > 0")));
    }
    let d = check_dataset(dataset)?;
    let mut a_inv = Matrix::scaled_identity(d, 1.0 / rho);
    let mut b = vec![0.0; d];
    let mut ws = RankOneWorkspace::new(d);
    for (i, traj) in dataset.trajectories().iter().enumerate() {
        let terms = TrajectoryTerms::new(traj, lambda, gamma);
        for t in 0..terms.len {
            rank_one_update_in_place(&mut a_inv, terms.z(t), terms.w(t), &mut ws)
                .map_err(|_| Error::SingularUpdateAt { trajectory: i, step: t })?;
        }
        terms.accumulate_b(&mut b);
    }
    let theta = Vector::from_vec(a_inv.mul_slice(&b));
    if !theta.is_finite() {
        return Err(Error::Singular {
            column: 0,
            pivot: f64::NAN,
        });
    }
    Ok(theta)
}

/// A_λ⁻¹ from A₀⁻¹ using A_λ = A₀ + Σ (z_t − x_t)(x_t − γ x_{t+1})ᵀ.
pub fn warm_start_inverse(a0_inv: &Matrix, dataset: &Dataset, lambda: f64, gamma: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    let d = check_dataset(dataset)?;
    if a0_inv.rows() != d || a0_inv.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a0_inv.rows(),
        });
    }
    let terms: Vec<_> = dataset
        .trajectories()
        .iter()
        .map(|t| TrajectoryTerms::new(t, lambda, gamma))
        .collect();
    warm_start_from_terms(a0_inv, &terms)
}

pub(crate) fn warm_start_from_terms(a0_inv: &Matrix, terms: &[TrajectoryTerms<'_>]) -> Result<Matrix> {
    let d = a0_inv.rows();
    let mut out = a0_inv.clone();
    let mut ws = RankOneWorkspace::new(d);
    let mut u = vec![0.0; d];
    for (i, tt) in terms.iter().enumerate() {
        for t in 0..tt.len {
            let x = tt.traj.feature(t);
            let mut nonzero = false;
            for ((ui, zi), xi) in u.iter_mut().zip(tt.z(t)).zip(x) {
                *ui = zi - xi;
                nonzero |= *ui != 0.0;
            }
            if !nonzero {
                continue;
            }
            rank_one_update_in_place(&mut out, &u, tt.w(t), &mut ws)
                .map_err(|_| Error::SingularUpdateAt { trajectory: i, step: t })?;
        }
    }
    if !out.is_finite() {
        return Err(Error::Singular {
            column: 0,
            pivot: f64::NAN,
        });
    }
    Ok(out)
}
