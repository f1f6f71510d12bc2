//! Owner/user storage allocation map, its stability and Lyapunov analysis,
//! and data-loss models for cyclic replica placement.

pub mod dynamics;
pub mod error;
pub mod exact;
pub mod failure_sim;
pub mod ledger;
pub mod model;
pub mod replication;

pub use error::{Error, Result};
pub use model::{iterate, step_general, step_two_user, ModelParams, SystemState, Trajectory};
