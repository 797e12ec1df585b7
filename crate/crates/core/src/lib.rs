//! Proportional-fair airtime allocation for multi-channel, multi-rate
//! wireless networks.
//!
//! Users `i` reach channels `k` at bit rates `b[i][k]`. An allocation
//! assigns each user a fraction `P[i][k]` of every channel's airtime so
//! that every channel is fully used, and the proportional-fair optimum
//! maximizes `sum_i c[i] * ln(sum_k P[i][k] * b[i][k])`.
//!
//! - [`model`] and [`metrics`]: rate matrices, allocations, throughputs,
//!   shadow prices, equivalent airtime, KKT residuals, Jain's index.
//! - [`solver`]: the general iterative solver, the `O(n log n)`
//!   two-user and two-channel solvers, the single-channel closed form,
//!   and loop removal.
//! - [`verify`]: an independent projected-gradient oracle and structure
//!   checks.
//! - [`sim`]: a Monte-Carlo WLAN simulator comparing proportional
//!   fairness with max-throughput and strongest-signal association.


pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod sim;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use metrics::{
    equivalent_airtime, jain_index, kkt_residual, pf_objective, shadow_prices, throughputs,
    KktReport,
};
pub use model::{Allocation, Matrix, PfSolution, RateMatrix, Weights};
pub use solver::{solve, Algorithm, SolverConfig};
