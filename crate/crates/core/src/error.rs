use thiserror::Error;

use crate::model::PfSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid rate matrix: {0}")]
    InvalidRates(String),

    /// A user whose rate is zero on every channel. Such users must be
    /// removed from consideration before optimizing.
    #[error(
        "user {user} has zero rate on every channel; users that cannot be served \
         on any channel must be removed before optimization"
    )]
    ZeroRow { user: usize },

    #[error("infeasible allocation: channel {channel} airtime sums to {sum}")]
    Infeasible { channel: usize, sum: f64 },

    #[error("invalid allocation: entry ({user}, {channel}) = {value} outside [0, 1]")]
    OutOfRange {
        user: usize,
        channel: usize,
        value: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(
        "solver did not converge after {} iterations (kkt residual {:.3e})",
        .solution.iterations, .solution.kkt_residual
    )]
    NotConverged { solution: Box<PfSolution> },

    #[error("allocation is not KKT-optimal (residual {residual:.3e} > {tolerance:.3e})")]
    NotOptimal { residual: f64, tolerance: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
