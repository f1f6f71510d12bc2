use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Some state component left the divergence bound (or became non-finite)
    /// while producing the state at `stage`.
    #[error("orbit diverged at stage {stage}")]
    Divergence { stage: u64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("expected {expected} users, found {found}")]
    UserCount { expected: usize, found: usize },

    #[error("singular parameters: xi1 == xi2")]
    SingularParameters,

    #[error("placement needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("stage {stage} is outside the trajectory")]
    OutOfRange { stage: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
