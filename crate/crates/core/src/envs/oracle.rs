use std::collections::HashMap;

use rand::Rng;

use super::game2048::Game2048;
use super::mountain_car::MountainCar;
use super::random_walk::{self, RandomWalk};
use super::{generate, rollout_return, stream_rng, Domain, EnvConfig, EnvId};
use crate::error::{Error, Result};

/// Seed offset for held-out evaluation data, so it never overlaps training
/// data generated from the same user seed.
const HELD_OUT_SALT: u64 = 0x0005_eed0_e7a1_u64;
const ROLLOUT_SALT: u64 = 0x0000_a110_u64;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub key: String,
    pub features: Vec<f64>,
    pub value: f64,
    /// Standard error of `value`; zero for exact values.
    pub std_error: f64,
    pub weight: f64,
}

/// A state with its features and weight, as consumed by root MSVE.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalState {
    pub key: String,
    pub features: Vec<f64>,
    pub weight: f64,
}

/// True values ν^π on a weighted set of states.
#[derive(Debug, Clone)]
pub struct EnvOracle {
    pub env: EnvId,
    pub d: usize,
    pub gamma: f64,
    entries: Vec<OracleEntry>,
    index: HashMap<String, usize>,
}

impl EnvOracle {
    pub fn new(env: EnvId, gamma: f64, mut entries: Vec<OracleEntry>) -> Result<Self> {
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if entries.iter().any(|e| !(e.weight >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidArgument("oracle weights must be nonnegative with positive sum".into()));
        }
        for e in &mut entries {
            e.weight /= total;
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key.clone(), i))
            .collect();
        Ok(EnvOracle {
            env,
            d: env.dim(),
            gamma,
            entries,
            index,
        })
    }

    pub fn entries(&self) -> &[OracleEntry] {
        &self.entries
    }

    pub fn true_value(&self, key: &str) -> Option<f64> {
        self.index.get(key).map(|&i| self.entries[i].value)
    }

    pub fn eval_states(&self) -> Vec<EvalState> {
        self.entries
            .iter()
            .map(|e| EvalState {
                key: e.key.clone(),
                features: e.features.clone(),
                weight: e.weight,
            })
            .collect()
    }
}

/// Sizes of the Monte-Carlo oracle for domains without a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBudget {
    /// Held-out trajectories whose visited states define μ.
    pub held_out: usize,
    /// Visits sampled (uniformly over all held-out visits) for evaluation.
    pub sample_states: usize,
    pub rollouts: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            held_out: 1000,
            sample_states: 300,
            rollouts: 100,
        }
    }
}

/// Exact random-walk values weighted by expected per-step occupancy.
pub fn random_walk_true_values(horizon: usize) -> Result<EnvOracle> {
    random_walk_values_with_gamma(horizon, EnvId::RandomWalk.gamma())
}

fn random_walk_values_with_gamma(horizon: usize, gamma: f64) -> Result<EnvOracle> {
    let values = random_walk::exact_values(gamma)?;
    let weights = random_walk::occupancy(horizon);
    let entries = (0..random_walk::DIM)
        .map(|s| OracleEntry {
            key: RandomWalk.encode(&(s as i32)),
            features: RandomWalk.features(&(s as i32)),
            value: values[s],
            std_error: 0.0,
            weight: weights[s],
        })
        .collect();
    EnvOracle::new(EnvId::RandomWalk, gamma, entries)
}

fn rollout_cap(gamma: f64) -> usize {
    if gamma < 1.0 {
        // discount below 1e-8
        ((1e-8f64).ln() / gamma.ln()).ceil() as usize
    } else {
        100_000
    }
}

fn mc_values_for<D: Domain>(
    domain: &D,
    env: EnvId,
    gamma: f64,
    states: &[(Vec<f64>, f64)],
    rollouts: usize,
    seed: u64,
) -> Result<EnvOracle> {
    if rollouts < 2 {
        return Err(Error::InvalidArgument("need at least 2 rollouts per state".into()));
    }
    let cap = rollout_cap(gamma);
    let mut entries: Vec<OracleEntry> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, (x, w)) in states.iter().enumerate() {
        let state = domain.state_from_features(x);
        let key = domain.encode(&state);
        if let Some(&j) = seen.get(&key) {
            entries[j].weight += w;
            continue;
        }
        let mut rng = stream_rng(seed ^ ROLLOUT_SALT, i as u64);
        let returns: Vec<f64> = (0..rollouts)
            .map(|_| rollout_return(domain, &state, gamma, cap, &mut rng))
            .collect();
        let mean = returns.iter().sum::<f64>() / rollouts as f64;
        let var = returns.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (rollouts - 1) as f64;
        seen.insert(key.clone(), entries.len());
        entries.push(OracleEntry {
            key,
            features: x.clone(),
            value: mean,
            std_error: (var / rollouts as f64).sqrt(),
            weight: *w,
        });
    }
    EnvOracle::new(env, gamma, entries)
}

/// Monte-Carlo estimate of ν^π at each `(features, weight)` state: the mean
/// discounted return of `rollouts` independent policy rollouts.
pub fn mc_true_values(env: EnvId, states: &[(Vec<f64>, f64)], rollouts: usize, seed: u64) -> Result<EnvOracle> {
    mc_values_with_gamma(env, env.gamma(), states, rollouts, seed)
}

fn mc_values_with_gamma(
    env: EnvId,
    gamma: f64,
    states: &[(Vec<f64>, f64)],
    rollouts: usize,
    seed: u64,
) -> Result<EnvOracle> {
    match env {
        EnvId::RandomWalk => mc_values_for(&RandomWalk, env, gamma, states, rollouts, seed),
        EnvId::Game2048 => mc_values_for(&Game2048, env, gamma, states, rollouts, seed),
        EnvId::MountainCar => mc_values_for(&MountainCar, env, gamma, states, rollouts, seed),
    }
}

/// The evaluation oracle for `env`: exact for the random walk, Monte-Carlo
/// over states sampled from held-out trajectories otherwise.
pub fn build_oracle(env: EnvId, horizon: usize, seed: u64, budget: OracleBudget) -> Result<EnvOracle> {
    build_oracle_with_gamma(env, horizon, env.gamma(), seed, budget)
}

/// [`build_oracle`] for values discounted by `gamma` instead of the
/// domain's default.
pub fn build_oracle_with_gamma(
    env: EnvId,
    horizon: usize,
    gamma: f64,
    seed: u64,
    budget: OracleBudget,
) -> Result<EnvOracle> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must be in [0, 1], got {gamma}")));
    }
    if env == EnvId::RandomWalk {
        return random_walk_values_with_gamma(horizon, gamma);
    }
    let held_out = generate(&EnvConfig {
        env,
        horizon,
        n_trajectories: budget.held_out,
        seed: seed ^ HELD_OUT_SALT,
    })?;
    let visits: Vec<&[f64]> = held_out
        .trajectories()
        .iter()
        .flat_map(|t| (0..t.effective_len()).map(move |s| t.feature(s)))
        .collect();
    if visits.is_empty() {
        return Err(Error::InsufficientData { n: 0 });
    }
    let mut rng = stream_rng(seed ^ HELD_OUT_SALT, u64::MAX);
    let m = budget.sample_states.max(1);
    let states: Vec<(Vec<f64>, f64)> = (0..m)
        .map(|_| (visits[rng.random_range(0..visits.len())].to_vec(), 1.0 / m as f64))
        .collect();
    mc_values_with_gamma(env, gamma, &states, budget.rollouts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_walk_oracle_is_normalized() {
        let o = random_walk_true_values(40).unwrap();
        assert_eq!(o.entries().len(), 5);
        let total: f64 = o.entries().iter().map(|e| e.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(o.true_value("s2").is_some());
        assert!(o.true_value("s7").is_none());
    }

    #[test]
    fn absorbing_state_is_worth_zero() {
        // A 2048 board with no legal move and a car at the goal.
        let dead: Vec<f64> = [2, 4, 2, 4, 4, 2, 4, 2, 2, 4, 2, 4, 4, 2, 4, 2].iter().map(|v| *v as f64).collect();
        let o = mc_true_values(EnvId::Game2048, &[(dead, 1.0)], 10, 1).unwrap();
        assert_eq!(o.entries()[0].value, 0.0);

        let o = mc_true_values(EnvId::MountainCar, &[(vec![0.5, 0.01], 1.0)], 10, 1).unwrap();
        assert_eq!(o.entries()[0].value, 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_random_walk() {
        let exact = random_walk_true_values(40).unwrap();
        let states: Vec<_> = exact.entries().iter().map(|e| (e.features.clone(), e.weight)).collect();
        let mc = mc_true_values(EnvId::RandomWalk, &states, 50_000, 77).unwrap();
        for (e, m) in exact.entries().iter().zip(mc.entries()) {
            assert_eq!(e.key, m.key);
            assert!(
                (e.value - m.value).abs() <= 3.0 * m.std_error,
                "{}: exact {} vs mc {} ± {}",
                e.key,
                e.value,
                m.value,
                m.std_error
            );
        }
    }

    #[test]
    fn doubling_rollouts_halves_variance() {
        let state = vec![(vec![0.0, 0.0, 1.0, 0.0, 0.0], 1.0)];
        let repeats = 400;
        let variance = |rollouts: usize, salt: u64| {
            let est: Vec<f64> = (0..repeats)
                .map(|r| {
                    mc_true_values(EnvId::RandomWalk, &state, rollouts, salt + r as u64).unwrap().entries()[0].value
                })
                .collect();
            let mean = est.iter().sum::<f64>() / repeats as f64;
            est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64
        };
        let ratio = variance(100, 1_000) / variance(50, 9_000);
        assert!((ratio - 0.5).abs() <= 0.15, "variance ratio {ratio}");
    }

    #[test]
    fn duplicate_states_merge_weights() {
        let x = vec![0.0, 1.0, 0.0, 0.0, 0.0];
        let o = mc_true_values(EnvId::RandomWalk, &[(x.clone(), 0.25), (x, 0.75)], 10, 3).unwrap();
        assert_eq!(o.entries().len(), 1);
        assert_eq!(o.entries()[0].weight, 1.0);
    }
}
