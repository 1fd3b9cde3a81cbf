//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function returns a JSON string; the plain Rust functions
//! behind them are usable (and tested) natively.

use allstd_core::allstd::{allstd, default_grid};
use allstd_core::envs::{build_oracle, generate, random_walk, random_walk_true_values, EnvConfig, EnvId, OracleBudget};
use allstd_core::eval::oracle_root_msve;
use allstd_core::lstd::{lstd, DEFAULT_RIDGE};
use allstd_core::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Smaller than the CLI's oracle so a page interaction stays interactive.
pub const DEMO_BUDGET: OracleBudget = OracleBudget {
    held_out: 200,
    sample_states: 100,
    rollouts: 30,
};

pub const MAX_TRAJECTORIES: usize = 2_000;

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSweep {
    pub env: String,
    pub n: usize,
    pub lambdas: Vec<f64>,
    /// Mean leave-one-trajectory-out error per λ.
    pub cv_scores: Vec<f64>,
    /// Root MSVE of LSTD(λ) against the domain's oracle.
    pub root_msve: Vec<f64>,
    pub chosen_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueEstimates {
    pub lambda: f64,
    pub true_values: Vec<f64>,
    pub estimates: Vec<f64>,
    pub root_msve: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarEpisode {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub reached_goal: bool,
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_TRAJECTORIES).contains(&n) {
        return Err(Error::InvalidArgument(format!("n must be in 2..={MAX_TRAJECTORIES}, got {n}")));
    }
    Ok(())
}

/// Scores every default-grid λ by cross-validation and by true error.
pub fn lambda_sweep(env: &str, n: usize, seed: u64) -> Result<LambdaSweep> {
    check_n(n)?;
    let env: EnvId = env.parse()?;
    let ds = generate(&EnvConfig::new(env, n, seed))?;
    let oracle = build_oracle(env, ds.horizon(), seed, DEMO_BUDGET)?;
    let grid = default_grid();
    let sel = allstd(&ds, &grid, ds.gamma(), DEFAULT_RIDGE)?;
    let root_msve = grid
        .iter()
        .map(|&l| oracle_root_msve(&lstd(&ds, l, ds.gamma(), DEFAULT_RIDGE)?, &oracle))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSweep {
        env: env.name().to_string(),
        n,
        chosen_lambda: sel.lambda(),
        lambdas: grid,
        cv_scores: sel.scores,
        root_msve,
    })
}

/// LSTD(λ) estimates of the five random-walk state values.
pub fn value_estimates(n: usize, seed: u64, lambda: f64) -> Result<ValueEstimates> {
    check_n(n)?;
    let ds = generate(&EnvConfig::new(EnvId::RandomWalk, n, seed))?;
    let theta = lstd(&ds, lambda, ds.gamma(), DEFAULT_RIDGE)?;
    let oracle = random_walk_true_values(ds.horizon())?;
    Ok(ValueEstimates {
        lambda,
        true_values: random_walk::exact_values(ds.gamma())?.into_vec(),
        root_msve: oracle_root_msve(&theta, &oracle)?,
        estimates: theta.into_vec(),
    })
}

/// One mountain-car episode under the data-generating policy.
pub fn car_episode(seed: u64) -> Result<CarEpisode> {
    let ds = generate(&EnvConfig::new(EnvId::MountainCar, 1, seed))?;
    let traj = &ds.trajectories()[0];
    let len = traj.effective_len();
    let (position, velocity) = (0..len).map(|t| (traj.feature(t)[0], traj.feature(t)[1])).unzip();
    Ok(CarEpisode {
        position,
        velocity,
        reached_goal: traj.is_terminated(),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())),
        Err(e) => Err(JsValue::from_str(&e.to_string())),
    }
}

#[wasm_bindgen(js_name = lambdaSweep)]
pub fn lambda_sweep_js(env: &str, n: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(lambda_sweep(env, n, seed.into()))
}

#[wasm_bindgen(js_name = valueEstimates)]
pub fn value_estimates_js(n: usize, seed: u32, lambda: f64) -> std::result::Result<String, JsValue> {
    to_js(value_estimates(n, seed.into(), lambda))
}

#[wasm_bindgen(js_name = carEpisode)]
pub fn car_episode_js(seed: u32) -> std::result::Result<String, JsValue> {
    to_js(car_episode(seed.into()))
}
