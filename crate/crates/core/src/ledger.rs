//! Storage bookkeeping derived from trajectories: per-stage allocations,
//! node sizes, demand rates, traffic splits and chunk counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{step_general, ModelParams, SystemState, Trajectory};

/// Bytes per decimal gigabyte (1 Gb = 1000 Mb = 10⁹ bytes).
pub const GIGABYTE: f64 = 1e9;
pub const MEGABYTE: f64 = 1e6;

/// A transferred quantity: magnitude plus the raw sign of `ξ_i x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedAmount {
    pub magnitude: f64,
    pub negative: bool,
}

impl SignedAmount {
    pub fn from_signed(value: f64) -> Self {
        Self {
            magnitude: value.abs(),
            negative: value.is_sign_negative() && value != 0.0,
        }
    }

    pub fn signed(&self) -> f64 {
        if self.negative {
            -self.magnitude
        } else {
            self.magnitude
        }
    }

    pub fn sign_char(&self) -> char {
        if self.negative {
            '-'
        } else {
            '+'
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub l: u64,
    /// `α v_c⁽ˡ⁾` in bytes.
    pub owner_alloc: f64,
    /// `ξ_i x_i⁽ˡ⁾` in bytes, one entry per user.
    pub user_alloc: Vec<SignedAmount>,
}

/// Iterates the map once from `s0` and samples the owner and user
/// allocations at each requested stage. `unit_scale` is bytes per model unit.
pub fn allocation_report(
    params: &ModelParams,
    s0: &SystemState,
    stages: &[u64],
    unit_scale: f64,
) -> Result<Vec<AllocationRecord>> {
    if stages.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("stages must be sorted ascending".into()));
    }
    if let Some(&first) = stages.first() {
        if first < s0.l {
            return Err(Error::OutOfRange { stage: first });
        }
    }
    let mut records = Vec::with_capacity(stages.len());
    let mut state = s0.clone();
    for &stage in stages {
        while state.l < stage {
            state = step_general(params, &state)?;
        }
        records.push(AllocationRecord {
            l: stage,
            owner_alloc: params.alpha * state.v * unit_scale,
            user_alloc: params
                .xi
                .iter()
                .zip(&state.x)
                .map(|(xi, x)| SignedAmount::from_signed(xi * x * unit_scale))
                .collect(),
        });
    }
    Ok(records)
}

/// Initial state whose owner and per-user allocations equal the given byte
/// amounts: `α v⁽⁰⁾ = owner_bytes`, `ξ_i x_i⁽⁰⁾ = user_bytes`.
pub fn state_from_allocations(
    params: &ModelParams,
    owner_bytes: f64,
    user_bytes: f64,
    unit_scale: f64,
) -> SystemState {
    SystemState::new(
        owner_bytes / unit_scale / params.alpha,
        params.xi.iter().map(|xi| user_bytes / unit_scale / xi).collect(),
    )
}

/// `q_i = ξ_i x_i v_c` for every user.
pub fn demand_rate(params: &ModelParams, s: &SystemState) -> Vec<f64> {
    params
        .xi
        .iter()
        .zip(&s.x)
        .map(|(xi, x)| xi * x * s.v)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSeries {
    /// Zero-based user index.
    pub user: usize,
    pub first_stage: u64,
    /// `N_i⁽ˡ⁾ = ξ_i x_i⁽ˡ⁾`.
    pub values: Vec<f64>,
}

pub fn node_series(traj: &Trajectory, user: usize) -> Result<NodeSeries> {
    let xi = *traj.params.xi.get(user).ok_or_else(|| {
        Error::InvalidArgument(format!("user index {user} out of range"))
    })?;
    Ok(NodeSeries {
        user,
        first_stage: traj.first().map_or(0, |s| s.l),
        values: traj.states.iter().map(|s| xi * s.x[user]).collect(),
    })
}

/// `x_i⁽ˡᵒ⁾ − x_i⁽ʰⁱ⁾` for the zero-based user index.
pub fn traffic_split(traj: &Trajectory, user: usize, l_lo: u64, l_hi: u64) -> Result<f64> {
    if l_lo > l_hi {
        return Err(Error::InvalidArgument(format!(
            "l_lo ({l_lo}) must not exceed l_hi ({l_hi})"
        )));
    }
    if user >= traj.params.users() {
        return Err(Error::InvalidArgument(format!("user index {user} out of range")));
    }
    let lo = traj.at(l_lo).ok_or(Error::OutOfRange { stage: l_lo })?;
    let hi = traj.at(l_hi).ok_or(Error::OutOfRange { stage: l_hi })?;
    Ok(lo.x[user] - hi.x[user])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSeries {
    pub initial: f64,
    /// `c⁽⁰⁾, c⁽¹⁾, …`; one more entry than the capacity series.
    pub values: Vec<f64>,
}

impl ChunkSeries {
    /// Counts rounded half-up for display.
    pub fn rounded(&self) -> Vec<f64> {
        self.values.iter().map(|c| (c + 0.5).floor()).collect()
    }
}

/// `c⁽ˡ⁺¹⁾ = c⁽ˡ⁾ − c⁽ˡ⁾ v_c⁽ˡ⁾`.
pub fn chunk_sequence(c0: f64, v_series: &[f64]) -> Result<ChunkSeries> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidArgument(format!("initial chunk count must be positive, got {c0}")));
    }
    let mut values = Vec::with_capacity(v_series.len() + 1);
    values.push(c0);
    let mut c = c0;
    for v in v_series {
        c = c - c * v;
        values.push(c);
    }
    Ok(ChunkSeries { initial: c0, values })
}
