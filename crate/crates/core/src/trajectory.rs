//! Fixed-horizon trajectories, eligibility traces, Monte-Carlo returns, and
//! the line-delimited JSON dataset format.
//!
//! Episodes shorter than the horizon are padded: padded steps carry a zero
//! feature vector, zero reward, and `mask = false`. The feature row after the
//! last real step of a terminated episode is also zero, so padding adds
//! nothing to any LSTD statistic.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: i64,
    d: usize,
    horizon: usize,
    /// (H + 1) × d, row-major.
    features: Vec<f64>,
    rewards: Vec<f64>,
    mask: Vec<bool>,
}

impl Trajectory {
    /// Builds a trajectory from H+1 feature rows, H rewards and H mask flags.
    pub fn new(id: i64, features: Vec<Vec<f64>>, rewards: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let horizon = rewards.len();
        if features.len() != horizon + 1 {
            return Err(Error::DimensionMismatch {
                expected: horizon + 1,
                found: features.len(),
            });
        }
        if mask.len() != horizon {
            return Err(Error::DimensionMismatch {
                expected: horizon,
                found: mask.len(),
            });
        }
        let d = features[0].len();
        let mut flat = Vec::with_capacity((horizon + 1) * d);
        for row in &features {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let traj = Trajectory {
            id,
            d,
            horizon,
            features: flat,
            rewards,
            mask,
        };
        traj.validate()?;
        Ok(traj)
    }

    /// Pads an episode of `steps.len() <= horizon` real steps out to `horizon`.
    ///
    /// `next` is the feature row following the last real step: the zero
    /// vector when the episode terminated, the successor state's features
    /// when it was cut off by the horizon.
    pub fn padded(id: i64, horizon: usize, steps: Vec<(Vec<f64>, f64)>, next: Vec<f64>) -> Result<Self> {
        let len = steps.len();
        if len > horizon {
            return Err(Error::InvalidArgument(format!(
                "episode has {len} steps, horizon is {horizon}"
            )));
        }
        let d = next.len();
        let mut features = Vec::with_capacity(horizon + 1);
        let mut rewards = Vec::with_capacity(horizon);
        for (x, r) in steps {
            features.push(x);
            rewards.push(r);
        }
        features.push(next);
        let mut mask = vec![true; len];
        for _ in len..horizon {
            features.push(vec![0.0; d]);
            rewards.push(0.0);
            mask.push(false);
        }
        if len < horizon && features[len].iter().any(|x| *x != 0.0) {
            return Err(Error::InvalidArgument(
                "an episode shorter than the horizon must end in a zero feature row".into(),
            ));
        }
        Self::new(id, features, rewards, mask)
    }

    fn validate(&self) -> Result<()> {
        if self.features.iter().any(|x| !x.is_finite()) || self.rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trajectory {} has non-finite entries",
                self.id
            )));
        }
        let real = self.effective_len();
        if self.mask[real..].iter().any(|m| *m) {
            return Err(Error::InvalidArgument(format!(
                "trajectory {}: mask must be a true-prefix",
                self.id
            )));
        }
        if real < self.horizon {
            let padded_features = &self.features[real * self.d..];
            if padded_features.iter().any(|x| *x != 0.0) || self.rewards[real..].iter().any(|r| *r != 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "trajectory {}: padded steps must have zero features and rewards",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> i64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Feature row `t` for t in 0..=H (row H is the terminal/successor row).
    #[inline]
    pub fn feature(&self, t: usize) -> &[f64] {
        &self.features[t * self.d..(t + 1) * self.d]
    }

    pub fn feature_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d.max(1)).take(self.horizon + 1)
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Number of real (unpadded) steps.
    pub fn effective_len(&self) -> usize {
        self.mask.iter().take_while(|m| **m).count()
    }

    /// True when the row after the last real step is the zero vector.
    pub fn is_terminated(&self) -> bool {
        self.feature(self.effective_len()).iter().all(|x| *x == 0.0)
    }

    /// `w_t = x_t − γ x_{t+1}` written into `out`.
    #[inline]
    pub(crate) fn td_direction(&self, t: usize, gamma: f64, out: &mut [f64]) {
        let (x, next) = (self.feature(t), self.feature(t + 1));
        for ((o, a), b) in out.iter_mut().zip(x).zip(next) {
            *o = a - gamma * b;
        }
    }
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!("{name} = {value} is outside [0, 1]")));
    }
    Ok(())
}

/// Flat H × d traces with decay `λγ`, reset at the start of the trajectory.
pub(crate) fn traces_flat(traj: &Trajectory, decay: f64) -> Vec<f64> {
    let d = traj.d;
    let mut z = vec![0.0; traj.horizon * d];
    for t in 0..traj.horizon {
        let (prev, cur) = z.split_at_mut(t * d);
        let cur = &mut cur[..d];
        cur.copy_from_slice(traj.feature(t));
        if t > 0 && decay != 0.0 {
            axpy(decay, &prev[(t - 1) * d..], cur);
        }
    }
    z
}

/// Eligibility traces `z_j = Σ_{t≤j} (λγ)^{j−t} x_t` for every step of `traj`.
pub fn eligibility_traces(traj: &Trajectory, lambda: f64, gamma: f64) -> Result<Vec<Vector>> {
    check_unit_interval("lambda", lambda)?;
    let d = traj.d;
    Ok(traces_flat(traj, lambda * gamma)
        .chunks_exact(d.max(1))
        .take(traj.horizon)
        .map(|z| Vector::from_vec(z.to_vec()))
        .collect())
}

/// Discounted return from zero-based `step` to the end of the horizon.
pub fn monte_carlo_return(traj: &Trajectory, step: usize, gamma: f64) -> Result<f64> {
    if step >= traj.horizon {
        return Err(Error::IndexOutOfRange {
            index: step,
            len: traj.horizon,
        });
    }
    Ok(traj.rewards[step..].iter().rev().fold(0.0, |g, r| r + gamma * g))
}

/// All returns `G_t` at once by the backward recursion `G_t = r_t + γ G_{t+1}`.
pub fn monte_carlo_returns(traj: &Trajectory, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; traj.horizon];
    let mut g = 0.0;
    for t in (0..traj.horizon).rev() {
        g = traj.rewards[t] + gamma * g;
        out[t] = g;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    d: usize,
    horizon: usize,
    gamma: f64,
    env: Option<String>,
}

impl Dataset {
    pub fn new(trajectories: Vec<Trajectory>, d: usize, horizon: usize, gamma: f64) -> Result<Self> {
        check_unit_interval("gamma", gamma)?;
        for traj in &trajectories {
            if traj.d != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: traj.d,
                });
            }
            if traj.horizon != horizon {
                return Err(Error::DimensionMismatch {
                    expected: horizon,
                    found: traj.horizon,
                });
            }
        }
        Ok(Dataset {
            trajectories,
            d,
            horizon,
            gamma,
            env: None,
        })
    }

    /// Infers d and H from the first trajectory.
    pub fn from_trajectories(trajectories: Vec<Trajectory>, gamma: f64) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or(Error::InsufficientData { n: 0 })?;
        let (d, horizon) = (first.d, first.horizon);
        Self::new(trajectories, d, horizon, gamma)
    }

    pub fn with_env(mut self, env: impl Into<String>) -> Self {
        self.env = Some(env.into());
        self
    }

    pub fn env(&self) -> Option<&str> {
        self.env.as_deref()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Dataset without trajectory `i`.
    pub fn without(&self, i: usize) -> Dataset {
        let trajectories = self
            .trajectories
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, t)| t.clone())
            .collect();
        Dataset {
            trajectories,
            ..self.clone_header()
        }
    }

    /// First `n` trajectories.
    pub fn truncated(&self, n: usize) -> Dataset {
        Dataset {
            trajectories: self.trajectories.iter().take(n).cloned().collect(),
            ..self.clone_header()
        }
    }

    /// Same header, trajectories reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        Dataset {
            trajectories: order.iter().map(|&i| self.trajectories[i].clone()).collect(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            trajectories: Vec::new(),
            d: self.d,
            horizon: self.horizon,
            gamma: self.gamma,
            env: self.env.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    format: String,
    env: Option<String>,
    n: usize,
    d: usize,
    #[serde(rename = "H")]
    horizon: usize,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRecord {
    id: i64,
    d: usize,
    #[serde(rename = "H")]
    horizon: usize,
    features: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    mask: Vec<bool>,
}

const FORMAT_TAG: &str = "lstd-trajectories/1";

fn to_io(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes a header line followed by one JSON object per trajectory.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut sink: W) -> Result<()> {
    let header = HeaderRecord {
        format: FORMAT_TAG.to_string(),
        env: dataset.env.clone(),
        n: dataset.len(),
        d: dataset.d,
        horizon: dataset.horizon,
        gamma: dataset.gamma,
    };
    serde_json::to_writer(&mut sink, &header).map_err(to_io)?;
    sink.write_all(b"\n")?;
    for traj in &dataset.trajectories {
        let record = TrajectoryRecord {
            id: traj.id,
            d: traj.d,
            horizon: traj.horizon,
            features: traj.feature_rows().map(<[f64]>::to_vec).collect(),
            rewards: traj.rewards.clone(),
            mask: traj.mask.clone(),
        };
        serde_json::to_writer(&mut sink, &record).map_err(to_io)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads trajectories written by [`write_jsonl`].
///
/// Files without the header line are accepted too: d and H come from the
/// first record and γ defaults to 1.
pub fn read_jsonl<R: BufRead>(source: R) -> Result<Dataset> {
    let mut lines = source.lines().enumerate().peekable();
    let first = match lines.peek() {
        Some((_, Ok(line))) => line.clone(),
        Some((_, Err(_))) => return Err(lines.next().unwrap().1.unwrap_err().into()),
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let value: serde_json::Value = serde_json::from_str(&first).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let header: Option<HeaderRecord> = if value.get("format").is_some() {
        lines.next();
        let header: HeaderRecord = serde_json::from_value(value).map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
        if header.format != FORMAT_TAG {
            return Err(Error::Parse {
                line: 1,
                message: format!("unknown format tag {:?}", header.format),
            });
        }
        Some(header)
    } else {
        None
    };
    let (mut d, mut horizon) = header.as_ref().map_or((None, None), |h| (Some(h.d), Some(h.horizon)));

    let mut trajectories = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrajectoryRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let expected_d = *d.get_or_insert(rec.d);
        let expected_h = *horizon.get_or_insert(rec.horizon);
        for (expected, found) in [(expected_d, rec.d), (expected_h, rec.horizon)] {
            if expected != found {
                return Err(Error::InconsistentDimension {
                    line: line_no,
                    expected,
                    found,
                });
            }
        }
        if let Some(row) = rec.features.iter().find(|row| row.len() != expected_d) {
            return Err(Error::InconsistentDimension {
                line: line_no,
                expected: expected_d,
                found: row.len(),
            });
        }
        let traj = Trajectory::new(rec.id, rec.features, rec.rewards, rec.mask).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        trajectories.push(traj);
    }
    let Some(header) = header else {
        let (Some(d), Some(horizon)) = (d, horizon) else {
            return Err(Error::Parse {
                line: 1,
                message: "no trajectories".into(),
            });
        };
        return Dataset::new(trajectories, d, horizon, 1.0);
    };
    if trajectories.len() != header.n {
        return Err(Error::Parse {
            line: trajectories.len() + 1,
            message: format!("header declares {} trajectories, found {}", header.n, trajectories.len()),
        });
    }
    let mut ds = Dataset::new(trajectories, header.d, header.horizon, header.gamma)?;
    ds.env = header.env;
    Ok(ds)
}
