//! Brute-force and Monte Carlo loss oracles.
//!
//! The fatal predicate for a group is reconstructed from the survival
//! coefficients: a group of seven machines (locals 0–3 on the owner rack,
//! 4–6 on the user rack) loses data iff all four owner machines or all three
//! user machines fail. It is the only monotone family whose non-fatal counts
//! by size are `(1, 7, 21, 34, 30, 12, 0, 0)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replication::placement::{build_placement, MACHINES_PER_GROUP};

const OWNER_MASK: u8 = 0b000_1111;
const USER_MASK: u8 = 0b111_0000;

/// Largest machine count accepted by [`exhaustive_loss_counts`].
pub const EXHAUSTIVE_MAX_MACHINES: usize = 28;

/// `mask` bit `j` set means local machine `j` failed.
pub fn group_fatal(mask: u8) -> bool {
    mask & OWNER_MASK == OWNER_MASK || mask & USER_MASK == USER_MASK
}

pub fn group_fatal_ids(failed: &[usize]) -> Result<bool> {
    let mut mask = 0u8;
    for &id in failed {
        if id >= MACHINES_PER_GROUP {
            return Err(Error::InvalidArgument(format!("local id {id} outside 0..7")));
        }
        mask |= 1 << id;
    }
    Ok(group_fatal(mask))
}

/// Non-fatal subsets of one group counted by size, over all 2⁷ subsets.
pub fn verify_coefficients() -> [u64; 8] {
    let mut counts = [0u64; 8];
    for mask in 0u8..128 {
        if !group_fatal(mask) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    /// Independent groups of seven, each judged by [`group_fatal`].
    Group,
    /// Loss iff every machine hosting some half of some node failed, under
    /// the cyclic placement.
    Structural,
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossMode::Group => "group",
            LossMode::Structural => "structural",
        })
    }
}

impl FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(LossMode::Group),
            "structural" => Ok(LossMode::Structural),
            other => Err(Error::InvalidArgument(format!("unknown loss mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureScenario {
    pub n: usize,
    pub failed: BTreeSet<usize>,
}

impl FailureScenario {
    pub fn new(n: usize, failed: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let mut set = BTreeSet::new();
        for id in failed {
            if id >= MACHINES_PER_GROUP * n {
                return Err(Error::InvalidArgument(format!(
                    "machine id {id} outside 0..{}",
                    MACHINES_PER_GROUP * n
                )));
            }
            if !set.insert(id) {
                return Err(Error::InvalidArgument(format!("machine id {id} repeated")));
            }
        }
        Ok(Self { n, failed: set })
    }

    fn bits(&self) -> Vec<u64> {
        let mut words = vec![0u64; words_for(self.n)];
        for &id in &self.failed {
            words[id / 64] |= 1 << (id % 64);
        }
        words
    }
}

fn words_for(n: usize) -> usize {
    (MACHINES_PER_GROUP * n).div_ceil(64)
}

fn bit(words: &[u64], id: usize) -> bool {
    words[id / 64] >> (id % 64) & 1 == 1
}

/// Loss predicate over failure bitsets for a fixed `n` and mode.
#[derive(Debug, Clone)]
pub struct LossJudge {
    pub n: usize,
    pub mode: LossMode,
    host_sets: Vec<Vec<usize>>,
}

impl LossJudge {
    pub fn new(n: usize, mode: LossMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let host_sets = match mode {
            LossMode::Group => Vec::new(),
            LossMode::Structural => build_placement(n)?
                .all_host_sets()
                .into_iter()
                .map(|(_, hosts)| hosts)
                .collect(),
        };
        Ok(Self { n, mode, host_sets })
    }

    /// `failed` holds one bit per machine id, least significant first.
    pub fn is_loss(&self, failed: &[u64]) -> bool {
        match self.mode {
            LossMode::Group => (0..self.n).any(|g| {
                let base = MACHINES_PER_GROUP * g;
                let mask = (0..MACHINES_PER_GROUP)
                    .filter(|&j| bit(failed, base + j))
                    .fold(0u8, |m, j| m | 1 << j);
                group_fatal(mask)
            }),
            LossMode::Structural => self
                .host_sets
                .iter()
                .any(|hosts| hosts.iter().all(|&id| bit(failed, id))),
        }
    }
}

pub fn scenario_loss(scenario: &FailureScenario, mode: LossMode) -> Result<bool> {
    Ok(LossJudge::new(scenario.n, mode)?.is_loss(&scenario.bits()))
}

/// Fatal scenarios counted by number of failed machines, over all `2^{7n}`
/// subsets.
pub fn exhaustive_loss_counts(n: usize, mode: LossMode) -> Result<Vec<u64>> {
    let machines = MACHINES_PER_GROUP * n;
    if machines > EXHAUSTIVE_MAX_MACHINES {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration limited to {EXHAUSTIVE_MAX_MACHINES} machines, n={n} has {machines}"
        )));
    }
    let judge = LossJudge::new(n, mode)?;
    let counts = (0u64..1 << machines)
        .into_par_iter()
        .fold(
            || vec![0u64; machines + 1],
            |mut acc, mask| {
                if judge.is_loss(&[mask]) {
                    acc[mask.count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; machines + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// `Σ_f count_f · p^f (1−p)^{7n−f}` from [`exhaustive_loss_counts`].
pub fn exhaustive_loss_probability(n: usize, p: f64, mode: LossMode) -> Result<f64> {
    check_probability(p)?;
    let counts = exhaustive_loss_counts(n, mode)?;
    let machines = counts.len() - 1;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(f, &c)| c as f64 * p.powi(f as i32) * (1.0 - p).powi((machines - f) as i32))
        .sum())
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability must lie in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: LossMode,
    pub p_hat: f64,
    pub half_width_95: f64,
}

/// Monte Carlo loss estimate. Trial `t` draws from ChaCha8 seeded with
/// `seed` on stream `t`, so the result does not depend on thread count.
pub fn mc_estimate(n: usize, p: f64, trials: u64, seed: u64, mode: LossMode) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    check_probability(p)?;
    let judge = LossJudge::new(n, mode)?;
    let machines = MACHINES_PER_GROUP * n;
    let base = ChaCha8Rng::seed_from_u64(seed);

    let losses: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0u64; words_for(n)],
            |words, trial| {
                let mut rng = base.clone();
                rng.set_stream(trial);
                words.iter_mut().for_each(|w| *w = 0);
                for id in 0..machines {
                    if rng.random::<f64>() < p {
                        words[id / 64] |= 1 << (id % 64);
                    }
                }
                u64::from(judge.is_loss(words))
            },
        )
        .sum();

    let p_hat = losses as f64 / trials as f64;
    Ok(McEstimate {
        n,
        p,
        trials,
        seed,
        mode,
        p_hat,
        half_width_95: 1.96 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keystone_counts() {
        assert_eq!(verify_coefficients(), [1, 7, 21, 34, 30, 12, 0, 0]);
    }

    #[test]
    fn group_predicate_examples() {
        assert!(group_fatal_ids(&[4, 5, 6]).unwrap());
        assert!(group_fatal_ids(&[0, 1, 2, 3]).unwrap());
        assert!(group_fatal_ids(&[0, 1, 2, 3, 4, 5, 6]).unwrap());
        assert!(!group_fatal_ids(&[0, 1, 2, 4, 5]).unwrap());
        for a in 0..7 {
            for b in 0..7 {
                assert!(!group_fatal_ids(&[a, b]).unwrap());
            }
        }
        assert!(group_fatal_ids(&[7]).is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(FailureScenario::new(3, [0, 20]).is_ok());
        assert!(FailureScenario::new(3, [21]).is_err());
        assert!(FailureScenario::new(3, [1, 1]).is_err());
    }

    #[test]
    fn scenario_examples() {
        let empty = FailureScenario::new(5, []).unwrap();
        assert!(!scenario_loss(&empty, LossMode::Group).unwrap());
        assert!(!scenario_loss(&empty, LossMode::Structural).unwrap());

        let triple = FailureScenario::new(5, [18, 19, 20]).unwrap();
        assert!(scenario_loss(&triple, LossMode::Group).unwrap());

        // Both primary machines of node 1.
        let primaries = FailureScenario::new(5, [0, 1]).unwrap();
        assert!(!scenario_loss(&primaries, LossMode::Structural).unwrap());
    }

    #[test]
    fn structural_loss_needs_every_host() {
        let plan = build_placement(4).unwrap();
        let hosts = plan.hosts_of(2, crate::replication::placement::Half::B);
        let all = FailureScenario::new(4, hosts.iter().copied()).unwrap();
        assert!(scenario_loss(&all, LossMode::Structural).unwrap());
        let partial = FailureScenario::new(4, hosts[1..].iter().copied()).unwrap();
        assert!(!scenario_loss(&partial, LossMode::Structural).unwrap());
    }

    #[test]
    fn exhaustive_single_group() {
        let counts = exhaustive_loss_counts(1, LossMode::Group).unwrap();
        let totals = [1u64, 7, 21, 35, 35, 21, 7, 1];
        let expected: Vec<u64> = totals.iter().zip(verify_coefficients()).map(|(t, a)| t - a).collect();
        assert_eq!(counts, expected);
        assert!(exhaustive_loss_counts(5, LossMode::Group).is_err());
    }

    #[test]
    fn mc_boundaries() {
        for mode in [LossMode::Group, LossMode::Structural] {
            assert_eq!(mc_estimate(4, 0.0, 500, 1, mode).unwrap().p_hat, 0.0);
            let all = mc_estimate(4, 1.0, 500, 1, mode).unwrap();
            assert_eq!((all.p_hat, all.half_width_95), (1.0, 0.0));
        }
        assert!(mc_estimate(4, 0.1, 0, 1, LossMode::Group).is_err());
        assert!(mc_estimate(4, -0.1, 10, 1, LossMode::Group).is_err());
    }

    #[test]
    fn mc_is_reproducible() {
        let a = mc_estimate(10, 0.2, 20_000, 7, LossMode::Group).unwrap();
        let b = mc_estimate(10, 0.2, 20_000, 7, LossMode::Group).unwrap();
        assert_eq!(a, b);
        let c = mc_estimate(10, 0.2, 20_000, 8, LossMode::Group).unwrap();
        assert_ne!(a.p_hat, c.p_hat);
    }

    #[test]
    fn mode_names() {
        for mode in [LossMode::Group, LossMode::Structural] {
            assert_eq!(mode.to_string().parse::<LossMode>().unwrap(), mode);
        }
        assert!("copyset".parse::<LossMode>().is_err());
    }
}
