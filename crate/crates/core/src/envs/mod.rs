//! Benchmark domains: a five-state random walk, 2048 under a uniform random
//! policy, and mountain car under a noisy energy-pumping policy.
//!
//! Every generator is a pure function of its [`EnvConfig`]. Trajectory `i`
//! draws from its own ChaCha stream, so growing `n` never changes the first
//! trajectories.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trajectory::{Dataset, Trajectory};

pub mod game2048;
pub mod mountain_car;
mod oracle;
pub mod random_walk;

pub use oracle::{
    build_oracle, build_oracle_with_gamma, mc_true_values, random_walk_true_values, EnvOracle, EvalState, OracleBudget, OracleEntry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnvId {
    RandomWalk,
    Game2048,
    MountainCar,
}

impl EnvId {
    pub const ALL: [EnvId; 3] = [EnvId::RandomWalk, EnvId::Game2048, EnvId::MountainCar];

    pub fn name(self) -> &'static str {
        match self {
            EnvId::RandomWalk => "random-walk",
            EnvId::Game2048 => "2048",
            EnvId::MountainCar => "mountain-car",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            EnvId::RandomWalk => random_walk::DIM,
            EnvId::Game2048 => game2048::DIM,
            EnvId::MountainCar => mountain_car::DIM,
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            EnvId::RandomWalk => 0.95,
            EnvId::Game2048 => 0.95,
            EnvId::MountainCar => 1.0,
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            EnvId::RandomWalk => 40,
            EnvId::Game2048 => 150,
            EnvId::MountainCar => 500,
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "random-walk" | "randomwalk" => Ok(EnvId::RandomWalk),
            "2048" | "game2048" | "game-2048" => Ok(EnvId::Game2048),
            "mountain-car" | "mountaincar" => Ok(EnvId::MountainCar),
            _ => Err(Error::InvalidArgument(format!(
                "unknown environment {s:?}; valid environments are random-walk, 2048, mountain-car"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub env: EnvId,
    pub horizon: usize,
    pub n_trajectories: usize,
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(env: EnvId, n_trajectories: usize, seed: u64) -> Self {
        EnvConfig {
            env,
            horizon: env.default_horizon(),
            n_trajectories,
            seed,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidArgument("horizon must be >= 1".into()));
        }
        if self.n_trajectories < 1 {
            return Err(Error::InvalidArgument("need at least one trajectory".into()));
        }
        Ok(())
    }
}

/// One transition of a domain under its fixed data-generating policy.
#[derive(Debug, Clone)]
pub struct Transition<S> {
    pub next: S,
    pub reward: f64,
    pub terminal: bool,
}

/// A domain together with the policy that generates its data.
pub trait Domain {
    type State: Clone;

    fn dim(&self) -> usize;

    fn initial_state(&self, rng: &mut ChaCha8Rng) -> Self::State;

    fn features(&self, state: &Self::State) -> Vec<f64>;

    /// Samples an action from the policy and applies it.
    fn step(&self, state: &Self::State, rng: &mut ChaCha8Rng) -> Transition<Self::State>;

    /// Recovers the state from its feature row (all three domains'
    /// feature maps are injective on reachable states).
    fn state_from_features(&self, x: &[f64]) -> Self::State;

    /// Canonical text key for the state.
    fn encode(&self, state: &Self::State) -> String;

    fn is_terminal(&self, _state: &Self::State) -> bool {
        false
    }
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs one episode of at most `horizon` steps and pads it.
pub fn run_episode<D: Domain>(domain: &D, id: i64, horizon: usize, rng: &mut ChaCha8Rng) -> Result<Trajectory> {
    let mut state = domain.initial_state(rng);
    let mut steps = Vec::with_capacity(horizon);
    let mut next_row = vec![0.0; domain.dim()];
    for t in 0..horizon {
        let x = domain.features(&state);
        let tr = domain.step(&state, rng);
        steps.push((x, tr.reward));
        if tr.terminal {
            break;
        }
        if t + 1 == horizon {
            next_row = domain.features(&tr.next);
        }
        state = tr.next;
    }
    Trajectory::padded(id, horizon, steps, next_row)
}

pub fn generate_with<D: Domain>(domain: &D, config: &EnvConfig, gamma: f64) -> Result<Dataset> {
    config.validate()?;
    let trajectories = (0..config.n_trajectories)
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            run_episode(domain, i as i64, config.horizon, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(trajectories, domain.dim(), config.horizon, gamma)?.with_env(config.env.name()))
}

pub fn generate(config: &EnvConfig) -> Result<Dataset> {
    let gamma = config.env.gamma();
    match config.env {
        EnvId::RandomWalk => generate_with(&random_walk::RandomWalk, config, gamma),
        EnvId::Game2048 => generate_with(&game2048::Game2048, config, gamma),
        EnvId::MountainCar => generate_with(&mountain_car::MountainCar, config, gamma),
    }
}

/// Discounted return of one policy rollout from `state`, at most `max_steps` long.
pub fn rollout_return<D: Domain>(domain: &D, state: &D::State, gamma: f64, max_steps: usize, rng: &mut ChaCha8Rng) -> f64 {
    if domain.is_terminal(state) {
        return 0.0;
    }
    let mut s = state.clone();
    let mut g = 0.0;
    let mut discount = 1.0;
    for _ in 0..max_steps {
        let tr = domain.step(&s, rng);
        g += discount * tr.reward;
        if tr.terminal {
            break;
        }
        discount *= gamma;
        s = tr.next;
    }
    g
}
