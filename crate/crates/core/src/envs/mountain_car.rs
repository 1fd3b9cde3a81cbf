//! Mountain car with the textbook dynamics:
//!
//! ```text
//! v' = clamp(v + 0.001·a − 0.0025·cos(3x), −0.07, 0.07)
//! x' = clamp(x + v', −1.2, 0.5)
//! ```
//!
//! with the velocity zeroed when the car hits the left wall. Episodes start at
//! x ~ U[−0.6, −0.4], v = 0, pay −1 per step and end on reaching x ≥ 0.5.
//!
//! The policy takes a uniformly random action a quarter of the time and
//! otherwise pushes forward iff v > 0.025·x + 0.01, reverse otherwise.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Domain, Transition};

pub const DIM: usize = 2;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.5;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const RANDOM_ACTION_PROB: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarState {
    pub position: f64,
    pub velocity: f64,
}

/// Deterministic physics step for throttle `action` ∈ {−1, 0, 1}.
pub fn dynamics(s: CarState, action: i32) -> CarState {
    let velocity = (s.velocity + 0.001 * action as f64 - 0.0025 * (3.0 * s.position).cos()).clamp(-MAX_SPEED, MAX_SPEED);
    let position = (s.position + velocity).clamp(MIN_POSITION, MAX_POSITION);
    let velocity = if position <= MIN_POSITION && velocity < 0.0 { 0.0 } else { velocity };
    CarState { position, velocity }
}

/// Action chosen by the deterministic part of the policy.
pub fn greedy_action(s: CarState) -> i32 {
    if s.velocity > 0.025 * s.position + 0.01 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MountainCar;

impl Domain for MountainCar {
    type State = CarState;

    fn dim(&self) -> usize {
        DIM
    }

    fn initial_state(&self, rng: &mut ChaCha8Rng) -> CarState {
        CarState {
            position: rng.random_range(-0.6..-0.4),
            velocity: 0.0,
        }
    }

    fn features(&self, s: &CarState) -> Vec<f64> {
        vec![s.position, s.velocity]
    }

    fn step(&self, s: &CarState, rng: &mut ChaCha8Rng) -> Transition<CarState> {
        let action = if rng.random_bool(RANDOM_ACTION_PROB) {
            rng.random_range(-1..=1)
        } else {
            greedy_action(*s)
        };
        let next = dynamics(*s, action);
        Transition {
            next,
            reward: -1.0,
            terminal: next.position >= GOAL_POSITION,
        }
    }

    fn state_from_features(&self, x: &[f64]) -> CarState {
        CarState {
            position: x[0],
            velocity: x[1],
        }
    }

    fn encode(&self, s: &CarState) -> String {
        format!("{},{}", s.position, s.velocity)
    }

    fn is_terminal(&self, s: &CarState) -> bool {
        s.position >= GOAL_POSITION
    }
}
