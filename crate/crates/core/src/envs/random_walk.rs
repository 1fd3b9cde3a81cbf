//! Five non-terminal states in a chain with absorbing ends. Entering the
//! right end pays +1; every other transition pays 0. Episodes start in the
//! middle state and move left or right with equal probability.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Domain, Transition};
use crate::error::Result;
use crate::linalg::{self, Matrix, Vector};

pub const DIM: usize = 5;
pub const START: usize = 2;

/// Positions 0..5 are the non-terminal states; −1 and 5 are the absorbing ends.
#[derive(Debug, Clone, Copy)]
pub struct RandomWalk;

impl Domain for RandomWalk {
    type State = i32;

    fn dim(&self) -> usize {
        DIM
    }

    fn initial_state(&self, _rng: &mut ChaCha8Rng) -> i32 {
        START as i32
    }

    fn features(&self, state: &i32) -> Vec<f64> {
        let mut x = vec![0.0; DIM];
        if (0..DIM as i32).contains(state) {
            x[*state as usize] = 1.0;
        }
        x
    }

    fn step(&self, state: &i32, rng: &mut ChaCha8Rng) -> Transition<i32> {
        let next = if rng.random_bool(0.5) { state + 1 } else { state - 1 };
        Transition {
            next,
            reward: if next == DIM as i32 { 1.0 } else { 0.0 },
            terminal: next < 0 || next >= DIM as i32,
        }
    }

    fn state_from_features(&self, x: &[f64]) -> i32 {
        x.iter().position(|v| *v == 1.0).map_or(-1, |i| i as i32)
    }

    fn encode(&self, state: &i32) -> String {
        format!("s{state}")
    }

    fn is_terminal(&self, state: &i32) -> bool {
        *state < 0 || *state >= DIM as i32
    }
}

/// Transition matrix among the non-terminal states.
pub fn transition_matrix() -> Matrix {
    let mut p = Matrix::zeros(DIM, DIM);
    for s in 0..DIM {
        if s > 0 {
            p[(s, s - 1)] = 0.5;
        }
        if s + 1 < DIM {
            p[(s, s + 1)] = 0.5;
        }
    }
    p
}

/// Expected immediate reward per non-terminal state.
pub fn expected_rewards() -> Vector {
    let mut r = Vector::zeros(DIM);
    r[DIM - 1] = 0.5;
    r
}

/// Solves (I − γP)ν = r.
pub fn exact_values(gamma: f64) -> Result<Vector> {
    let mut a = transition_matrix();
    for s in 0..DIM {
        for c in 0..DIM {
            a[(s, c)] *= -gamma;
        }
    }
    a.add_diagonal(1.0);
    linalg::solve(&a, &expected_rewards())
}

/// Expected fraction of real steps spent in each state over a horizon of
/// `horizon` steps, starting in the middle.
pub fn occupancy(horizon: usize) -> Vec<f64> {
    let p = transition_matrix();
    let mut dist = vec![0.0; DIM];
    dist[START] = 1.0;
    let mut total = [0.0; DIM];
    for _ in 0..horizon {
        for (t, d) in total.iter_mut().zip(&dist) {
            *t += d;
        }
        let mut next = vec![0.0; DIM];
        for (s, mass) in dist.iter().enumerate() {
            for (c, n) in next.iter_mut().enumerate() {
                *n += mass * p[(s, c)];
            }
        }
        dist = next;
    }
    let sum: f64 = total.iter().sum();
    total.iter().map(|t| t / sum).collect()
}
