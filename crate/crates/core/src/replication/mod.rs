//! Cyclic replica placement and exact data-loss probabilities.

pub mod loss;
pub mod placement;
pub mod polynomial;

pub use loss::{
    closed_form_loss, loss_curve, prob_data_loss, prob_f_failures, prob_no_loss, LossCurveRow,
    LossMethod, LossModel, LossResult,
};
pub use placement::{build_placement, Block, Half, HalfChunk, Machine, PlacementPlan, Rack, Replica, ReplicaRole};
pub use polynomial::{base_polynomial, loss_polynomial, BASE_COEFFS};
