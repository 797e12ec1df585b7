//! Proportional-fair airtime solvers.
//!
//! [`solve_general`] handles any number of users, channels and weights.
//! [`solve_two_user`] and [`solve_two_channel`] exploit the sorted
//! boundary structure of the unweighted two-user and two-channel cases
//! and run in `O(n log n)`. [`sparsify`] rewrites an optimal allocation
//! into one with an acyclic user/channel support graph.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PfSolution, RateMatrix, Weights, DEFAULT_ZERO_THRESHOLD};

mod general;
mod single;
mod sparsify;
mod two_channel;
mod two_user;

pub use general::{solve_general, solve_general_observed};
pub use single::{individual_channel_baseline, solve_single_channel};
pub use sparsify::{sparsify, sparsify_weighted, SparsifyReport};
pub use two_channel::solve_two_channel;
pub use two_user::solve_two_user;

/// Tuning knobs shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Largest change of any single airtime entry in one iteration.
    pub step_fraction: f64,
    /// Convergence threshold on the KKT residual.
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Airtime at or below this is treated as zero when classifying support.
    pub zero_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_fraction: 0.25,
            kkt_tolerance: 1e-8,
            max_iterations: 100_000,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_fraction > 0.0 && self.step_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_fraction {} not in (0, 1]",
                self.step_fraction
            )));
        }
        if !(self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidConfig("kkt_tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.zero_threshold >= 0.0) {
            return Err(Error::InvalidConfig("zero_threshold must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, kkt_tolerance: f64) -> Self {
        self.kkt_tolerance = kkt_tolerance;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    General,
    TwoUser,
    TwoChannel,
    /// Closed form for one channel, a specialized solver when there are
    /// two users or two channels and unit weights, otherwise general.
    Auto,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Algorithm::General),
            "2user" => Ok(Algorithm::TwoUser),
            "2channel" => Ok(Algorithm::TwoChannel),
            "auto" => Ok(Algorithm::Auto),
            other => Err(Error::Usage(format!(
                "unknown algorithm {other:?} (expected general, 2user, 2channel or auto)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::General => "general",
            Algorithm::TwoUser => "2user",
            Algorithm::TwoChannel => "2channel",
            Algorithm::Auto => "auto",
        })
    }
}

pub fn solve(
    rates: &RateMatrix,
    weights: &Weights,
    algorithm: Algorithm,
    cfg: &SolverConfig,
) -> Result<PfSolution> {
    weights.check_len(rates.num_users())?;
    let unweighted = || -> Result<()> {
        if weights.is_uniform() {
            Ok(())
        } else {
            Err(Error::Usage(format!("algorithm {algorithm} supports unit weights only")))
        }
    };
    match algorithm {
        Algorithm::General => solve_general(rates, weights, cfg),
        Algorithm::TwoUser => {
            unweighted()?;
            solve_two_user(rates, cfg)
        }
        Algorithm::TwoChannel => {
            unweighted()?;
            solve_two_channel(rates, cfg)
        }
        Algorithm::Auto => {
            if rates.num_channels() == 1 {
                solve_single_channel(rates, weights)
            } else if weights.is_uniform() && rates.num_users() == 2 {
                solve_two_user(rates, cfg)
            } else if weights.is_uniform() && rates.num_channels() == 2 {
                solve_two_channel(rates, cfg)
            } else {
                solve_general(rates, weights, cfg)
            }
        }
    }
}

/// Sort order used by the specialized solvers: ratio `num/den` descending,
/// a zero denominator counting as infinity, ties by original index. An
/// all-zero pair sorts as ratio zero.
pub(crate) fn ratio_order(num: &[f64], den: &[f64]) -> Vec<usize> {
    let key = |j: usize| -> f64 {
        if den[j] == 0.0 {
            if num[j] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            num[j] / den[j]
        }
    };
    let keys: Vec<f64> = (0..num.len()).map(key).collect();
    let mut order: Vec<usize> = (0..num.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    order
}
