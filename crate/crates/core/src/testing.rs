//! Random problem instances for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trajectory::{Dataset, Trajectory};

/// A dataset of `n` trajectories with uniform(−1, 1) features.
///
/// Episode lengths are uniform in 1..=h; full-length episodes end in a
/// random successor row half of the time (cut off by the horizon) and in
/// the zero row otherwise. Rewards are uniform(−1, 1) when `with_rewards`.
pub fn random_dataset(seed: u64, d: usize, n: usize, h: usize, gamma: f64, with_rewards: bool) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trajectories = (0..n)
        .map(|i| {
            let len = rng.random_range(1..=h);
            let steps = (0..len)
                .map(|_| {
                    let x = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let r = if with_rewards { rng.random_range(-1.0..1.0) } else { 0.0 };
                    (x, r)
                })
                .collect();
            let next = if len == h && rng.random_bool(0.5) {
                (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
            } else {
                vec![0.0; d]
            };
            Trajectory::padded(i as i64, h, steps, next).expect("valid random episode")
        })
        .collect();
    Dataset::new(trajectories, d, h, gamma).expect("valid random dataset")
}

/// Ridge regression of Monte-Carlo returns onto features over all real
/// steps: solves (Σ x xᵀ + ridge·I) θ = Σ x G by Gaussian elimination on
/// the normal equations, independently of the LSTD code path.
pub fn monte_carlo_regression(dataset: &Dataset, ridge: f64) -> Vec<f64> {
    let d = dataset.dim();
    let gamma = dataset.gamma();
    let mut gram = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    for traj in dataset.trajectories() {
        let len = traj.effective_len();
        let mut g = 0.0;
        for t in (0..len).rev() {
            g = traj.rewards()[t] + gamma * g;
            let x = traj.feature(t);
            for r in 0..d {
                rhs[r] += x[r] * g;
                for c in 0..d {
                    gram[r][c] += x[r] * x[c];
                }
            }
        }
    }
    for (r, row) in gram.iter_mut().enumerate() {
        row[r] += ridge;
    }
    gauss_solve(gram, rhs)
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
            b[r] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
