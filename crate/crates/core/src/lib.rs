//! Policy evaluation with LSTD(λ), efficient leave-one-trajectory-out
//! cross-validation, and automatic λ selection over a grid.
//!
//! The pipeline is:
//!
//! 1. generate or load a [`Dataset`] of fixed-horizon trajectories
//!    ([`envs`], [`trajectory::read_jsonl`]);
//! 2. fit θ with [`lstd::lstd`] or [`lstd::rlstd`] for a fixed λ, or let
//!    [`allstd::allstd`] pick λ from a grid;
//! 3. measure root MSVE against an [`envs::EnvOracle`] with [`eval`].

pub mod allstd;
pub mod envs;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod loto;
pub mod lstd;
pub mod testing;
pub mod trajectory;

pub use allstd::{allstd, naive_cv_lstd, LambdaSelection};
pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use loto::{lstd_loto_cv, naive_loto_cv, LotoResult};
pub use lstd::{build_system, lstd_solve, rlstd, warm_start_inverse, LinearSystem};
pub use trajectory::{Dataset, Trajectory};
