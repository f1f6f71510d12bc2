//! Cyclic primary/secondary placement over an owner rack and a user rack.
//!
//! For nodes `1..=n` (indices wrap modulo `n`):
//!
//! ```text
//! owner block i = { P_i,  S¹_{i+1}, S²_{i+2} }
//! user block i  = { S¹_i, S²_{i+1}, S¹_{i+2} }
//! ```
//!
//! Every machine stores one half of one node's chunk set. A primary entry is
//! split over two machines (halves A and B); each secondary entry takes one
//! machine, with `S¹` entries holding half A and `S²` entries holding half B.
//! Owner block `i` and user block `i` together form group `i` of seven
//! machines with ids `7(i−1) .. 7(i−1)+6`: local ids 0–3 on the owner rack,
//! 4–6 on the user rack.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MACHINES_PER_GROUP: usize = 7;
pub const OWNER_MACHINES_PER_BLOCK: usize = 4;
pub const USER_MACHINES_PER_BLOCK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplicaRole {
    Primary,
    Secondary1,
    Secondary2,
}

/// One replica entry, e.g. `S¹_3`. Nodes are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Replica {
    pub role: ReplicaRole,
    pub node: usize,
}

impl fmt::Display for Replica {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            ReplicaRole::Primary => write!(f, "P{}", self.node),
            ReplicaRole::Secondary1 => write!(f, "S1_{}", self.node),
            ReplicaRole::Secondary2 => write!(f, "S2_{}", self.node),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rack {
    Owner,
    User,
}

impl fmt::Display for Rack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rack::Owner => "owner",
            Rack::User => "user",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Half {
    A,
    B,
}

/// Half of one node's chunk set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfChunk {
    pub node: usize,
    pub half: Half,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub id: usize,
    pub rack: Rack,
    /// Block index, from 1.
    pub block: usize,
    pub replica: Replica,
    pub hosts: HalfChunk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub rack: Rack,
    pub index: usize,
    pub members: [Replica; 3],
    pub machines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub n: usize,
    pub owner_blocks: Vec<Block>,
    pub user_blocks: Vec<Block>,
    pub machines: Vec<Machine>,
}

/// Node `i + offset` with cyclic wraparound, 1-based.
fn wrap(n: usize, i: usize, offset: usize) -> usize {
    (i - 1 + offset) % n + 1
}

pub fn build_placement(n: usize) -> Result<PlacementPlan> {
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let mut owner_blocks = Vec::with_capacity(n);
    let mut user_blocks = Vec::with_capacity(n);
    let mut machines = Vec::with_capacity(MACHINES_PER_GROUP * n);

    let replica = |role, node| Replica { role, node };
    let half_of = |r: Replica| match r.role {
        ReplicaRole::Secondary2 => Half::B,
        _ => Half::A,
    };

    for i in 1..=n {
        let primary = replica(ReplicaRole::Primary, i);
        let owner_members = [
            primary,
            replica(ReplicaRole::Secondary1, wrap(n, i, 1)),
            replica(ReplicaRole::Secondary2, wrap(n, i, 2)),
        ];
        let mut add = |rack, block, replica: Replica, half| {
            let id = machines.len();
            machines.push(Machine {
                id,
                rack,
                block,
                replica,
                hosts: HalfChunk { node: replica.node, half },
            });
            id
        };
        let owner_ids = vec![
            add(Rack::Owner, i, primary, Half::A),
            add(Rack::Owner, i, primary, Half::B),
            add(Rack::Owner, i, owner_members[1], half_of(owner_members[1])),
            add(Rack::Owner, i, owner_members[2], half_of(owner_members[2])),
        ];

        let user_members = [
            replica(ReplicaRole::Secondary1, i),
            replica(ReplicaRole::Secondary2, wrap(n, i, 1)),
            replica(ReplicaRole::Secondary1, wrap(n, i, 2)),
        ];
        let user_ids = user_members
            .iter()
            .map(|&r| add(Rack::User, i, r, half_of(r)))
            .collect();

        owner_blocks.push(Block {
            rack: Rack::Owner,
            index: i,
            members: owner_members,
            machines: owner_ids,
        });
        user_blocks.push(Block {
            rack: Rack::User,
            index: i,
            members: user_members,
            machines: user_ids,
        });
    }

    Ok(PlacementPlan {
        n,
        owner_blocks,
        user_blocks,
        machines,
    })
}

impl PlacementPlan {
    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    /// Machine ids holding the given half of `node`'s chunk set.
    pub fn hosts_of(&self, node: usize, half: Half) -> Vec<usize> {
        self.machines
            .iter()
            .filter(|m| m.hosts == HalfChunk { node, half })
            .map(|m| m.id)
            .collect()
    }

    /// Host lists for every `(node, half)`, ordered by node then half.
    pub fn all_host_sets(&self) -> Vec<(HalfChunk, Vec<usize>)> {
        (1..=self.n)
            .flat_map(|node| [Half::A, Half::B].map(|half| HalfChunk { node, half }))
            .map(|hc| (hc, self.hosts_of(hc.node, hc.half)))
            .collect()
    }

    /// One block per line: kind, index, member labels, machine ids.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# kind\tindex\tmembers\tmachines\n");
        for block in self.owner_blocks.iter().chain(&self.user_blocks) {
            let members: Vec<String> = block.members.iter().map(Replica::to_string).collect();
            let ids: Vec<String> = block.machines.iter().map(usize::to_string).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                block.rack,
                block.index,
                members.join(","),
                ids.join(",")
            ));
        }
        out
    }
}
