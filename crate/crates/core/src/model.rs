//! The discrete owner/user allocation map.
//!
//! State at stage `l` is the owner capacity `v` (a fraction of `v_max`) and one
//! demand variable per user. One application of the map is
//!
//! ```text
//! v'  = α v − Σ_i (−1)^i ξ_i x_i
//! x_i' = (−1)^i ξ_i x_i v − Σ_{j≠i} (−1)^j ξ_j x_j
//! ```
//!
//! with users numbered from 1, so user 1 carries the minus sign. For two users
//! this is exactly
//!
//! ```text
//! v'  = α v + ξ₁x₁ − ξ₂x₂
//! x₁' = −ξ₁x₁v − ξ₂x₂
//! x₂' = ξ₁x₁ + ξ₂x₂v
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Any state component with a larger magnitude is treated as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Owner capacity scale, `0 < alpha <= 1`.
    pub alpha: f64,
    /// Per-user demand scales, all `>= 0`.
    pub xi: Vec<f64>,
    /// Maximum owner capacity in storage units.
    pub v_max: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, xi: Vec<f64>, v_max: f64) -> Result<Self> {
        let params = Self { alpha, xi, v_max };
        params.validate()?;
        Ok(params)
    }

    /// Two-user parameters with unit capacity bound.
    pub fn two_user(alpha: f64, xi1: f64, xi2: f64) -> Result<Self> {
        Self::new(alpha, vec![xi1, xi2], 1.0)
    }

    /// Checks the hard invariants. The alternating-sum bound is reported
    /// separately by [`ModelParams::within_alternating_bound`] because the
    /// published parameter sweeps cross it.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.xi.is_empty() {
            return Err(Error::InvalidParams("at least one user is required".into()));
        }
        if let Some((i, xi)) = self
            .xi
            .iter()
            .enumerate()
            .find(|(_, xi)| !(xi.is_finite() && **xi >= 0.0))
        {
            return Err(Error::InvalidParams(format!(
                "xi{} must be finite and >= 0, got {}",
                i + 1,
                xi
            )));
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "v_max must be positive, got {}",
                self.v_max
            )));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.xi.len()
    }

    /// `Σ_i (−1)^i ξ_i`.
    pub fn alternating_sum(&self) -> f64 {
        self.xi
            .iter()
            .enumerate()
            .map(|(i, xi)| user_sign(i) * xi)
            .sum()
    }

    pub fn within_alternating_bound(&self) -> bool {
        self.alternating_sum() <= 1.0
    }

    pub(crate) fn two_user_map(&self) -> Result<TwoUserMap> {
        match self.xi.as_slice() {
            &[xi1, xi2] => Ok(TwoUserMap {
                alpha: self.alpha,
                xi1,
                xi2,
            }),
            other => Err(Error::UserCount {
                expected: 2,
                found: other.len(),
            }),
        }
    }
}

/// `(−1)^i` for the zero-based user index `i` (user number `i + 1`).
#[inline]
fn user_sign(i: usize) -> f64 {
    if i % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub l: u64,
    pub v: f64,
    pub x: Vec<f64>,
}

impl SystemState {
    /// State at stage 0.
    pub fn new(v: f64, x: Vec<f64>) -> Self {
        Self { l: 0, v, x }
    }

    pub fn origin(users: usize) -> Self {
        Self::new(0.0, vec![0.0; users])
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.x.iter().all(|x| x.is_finite())
    }

    fn within_bound(&self) -> bool {
        std::iter::once(&self.v)
            .chain(&self.x)
            .all(|c| c.is_finite() && c.abs() <= DIVERGENCE_BOUND)
    }

    pub(crate) fn as_array3(&self) -> Result<[f64; 3]> {
        match self.x.as_slice() {
            &[x1, x2] => Ok([self.v, x1, x2]),
            other => Err(Error::UserCount {
                expected: 2,
                found: other.len(),
            }),
        }
    }

    pub(crate) fn from_array3(l: u64, s: [f64; 3]) -> Self {
        Self {
            l,
            v: s[0],
            x: vec![s[1], s[2]],
        }
    }
}

/// The two-user map on plain 3-vectors `(v, x₁, x₂)`, used by the analysis code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TwoUserMap {
    pub alpha: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl TwoUserMap {
    #[inline]
    pub fn apply(&self, [v, x1, x2]: [f64; 3]) -> [f64; 3] {
        let Self { alpha, xi1, xi2 } = *self;
        [
            alpha * v + xi1 * x1 - xi2 * x2,
            -(xi1 * x1 * v) - xi2 * x2,
            xi1 * x1 + xi2 * x2 * v,
        ]
    }

    /// Row-major Jacobian of [`TwoUserMap::apply`].
    #[inline]
    pub fn jacobian(&self, [v, x1, x2]: [f64; 3]) -> [[f64; 3]; 3] {
        let Self { alpha, xi1, xi2 } = *self;
        [
            [alpha, xi1, -xi2],
            [-xi1 * x1, -xi1 * v, -xi2],
            [xi2 * x2, xi1, xi2 * v],
        ]
    }
}

#[inline]
pub(crate) fn divergent(s: &[f64; 3]) -> bool {
    s.iter().any(|c| !(c.abs() <= DIVERGENCE_BOUND))
}

fn checked(next: SystemState) -> Result<SystemState> {
    if next.within_bound() {
        Ok(next)
    } else {
        Err(Error::Divergence { stage: next.l })
    }
}

/// One application of the n-user map.
pub fn step_general(params: &ModelParams, s: &SystemState) -> Result<SystemState> {
    if s.x.len() != params.users() {
        return Err(Error::UserCount {
            expected: params.users(),
            found: s.x.len(),
        });
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument("state has non-finite components".into()));
    }
    // Signed terms (−1)^j ξ_j x_j. Accumulating them one at a time in user
    // order keeps the n = 2 case bit-identical to `step_two_user`.
    let terms: Vec<f64> = params
        .xi
        .iter()
        .zip(&s.x)
        .enumerate()
        .map(|(j, (xi, x))| user_sign(j) * (xi * x))
        .collect();

    let v = terms.iter().fold(params.alpha * s.v, |acc, t| acc - t);
    let x = (0..terms.len())
        .map(|i| {
            let own = user_sign(i) * (params.xi[i] * s.x[i] * s.v);
            terms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(own, |acc, (_, t)| acc - t)
        })
        .collect();

    checked(SystemState { l: s.l + 1, v, x })
}

/// One application of the two-user map.
pub fn step_two_user(params: &ModelParams, s: &SystemState) -> Result<SystemState> {
    let map = params.two_user_map()?;
    let state = s.as_array3()?;
    if !s.is_finite() {
        return Err(Error::InvalidArgument("state has non-finite components".into()));
    }
    checked(SystemState::from_array3(s.l + 1, map.apply(state)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub states: Vec<SystemState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&SystemState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.states.last()
    }

    /// The state at stage `l`, if the trajectory covers it.
    pub fn at(&self, l: u64) -> Option<&SystemState> {
        let first = self.states.first()?.l;
        let offset = usize::try_from(l.checked_sub(first)?).ok()?;
        self.states.get(offset)
    }

    pub fn v_series(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.v).collect()
    }

    /// Re-applies the map from the first stored state and checks every later
    /// state bit for bit.
    pub fn replays_exactly(&self) -> bool {
        self.states.windows(2).all(|w| {
            step_general(&self.params, &w[0]).is_ok_and(|next| {
                next.l == w[1].l
                    && next.v.to_bits() == w[1].v.to_bits()
                    && next
                        .x
                        .iter()
                        .zip(&w[1].x)
                        .all(|(a, b)| a.to_bits() == b.to_bits())
            })
        })
    }
}

/// Applies the map `steps` times from `s0` and keeps the states after the
/// first `transient` ones. `s0` itself is not part of the result.
pub fn iterate(
    params: &ModelParams,
    s0: &SystemState,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    if transient >= steps {
        return Err(Error::InvalidArgument(format!(
            "transient ({transient}) must be smaller than steps ({steps})"
        )));
    }
    let mut states = Vec::with_capacity(steps - transient);
    let mut current = s0.clone();
    for k in 0..steps {
        current = step_general(params, &current)?;
        if k >= transient {
            states.push(current.clone());
        }
    }
    Ok(Trajectory {
        params: params.clone(),
        states,
    })
}

/// Truth value of each clause of `0 < Σ(−1)^i ξ_i x_i <= α v <= v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub weighted_demand: f64,
    pub owner_supply: f64,
    pub v_max: f64,
    pub demand_positive: bool,
    pub demand_within_supply: bool,
    pub supply_within_max: bool,
}

impl ConstraintReport {
    pub fn holds(&self) -> bool {
        self.demand_positive && self.demand_within_supply && self.supply_within_max
    }
}

pub fn check_constraint(params: &ModelParams, s: &SystemState) -> ConstraintReport {
    let weighted_demand: f64 = params
        .xi
        .iter()
        .zip(&s.x)
        .enumerate()
        .map(|(i, (xi, x))| user_sign(i) * xi * x)
        .sum();
    let owner_supply = params.alpha * s.v;
    ConstraintReport {
        weighted_demand,
        owner_supply,
        v_max: params.v_max,
        demand_positive: weighted_demand > 0.0,
        demand_within_supply: weighted_demand <= owner_supply,
        supply_within_max: owner_supply <= params.v_max,
    }
}
