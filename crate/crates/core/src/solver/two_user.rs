//! Two users, any number of channels.
//!
//! Sorting channels by `b[0][k] / b[1][k]` from large to small, some
//! optimum gives user 0 a prefix of the channels and user 1 the suffix,
//! with at most the boundary channel shared. The boundary is found by
//! binary search over exclusive prefix assignments.

use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::model::{Allocation, Matrix, PfSolution, RateMatrix, Weights};

use super::{ratio_order, SolverConfig};

pub fn solve_two_user(rates: &RateMatrix, cfg: &SolverConfig) -> Result<PfSolution> {
    cfg.validate()?;
    if rates.num_users() != 2 {
        return Err(Error::Usage(format!(
            "two-user solver needs exactly 2 users, got {}",
            rates.num_users()
        )));
    }
    let channels = rates.num_channels();
    let b0 = rates.user_rates(0);
    let b1 = rates.user_rates(1);
    let order = ratio_order(b0, b1);
    // Sorted rates, 1-based to match the boundary arithmetic below.
    let r0 = |k: usize| b0[order[k - 1]];
    let r1 = |k: usize| b1[order[k - 1]];

    // head[k] = user 0's throughput owning sorted channels 1..=k,
    // tail[k] = user 1's throughput owning channels k+1..=S.
    let mut head = vec![0.0; channels + 1];
    let mut tail = vec![0.0; channels + 1];
    for k in 1..=channels {
        head[k] = head[k - 1] + r0(k);
    }
    for k in (0..channels).rev() {
        tail[k] = tail[k + 1] + r1(k + 1);
    }

    // T0/T1 > b0/b1 at channel k, by cross-multiplication.
    let split_above = |s: usize, k: usize| head[s] * r1(k) > r0(k) * tail[s];
    let split_below = |s: usize, k: usize| head[s] * r1(k) < r0(k) * tail[s];

    let (mut lo, mut hi) = (1, channels);
    let mut split = channels / 2;
    let shared = loop {
        if lo == hi {
            break Some(lo);
        }
        split = split.clamp(lo, hi - 1);
        if split_above(split, split) {
            hi = split;
        } else if split_below(split, split + 1) {
            lo = split + 1;
        } else {
            break None;
        }
        split = (lo + hi) / 2;
    };

    let mut m = Matrix::zeros(2, channels);
    match shared {
        None => {
            for k in 1..=channels {
                let user = if k <= split { 0 } else { 1 };
                m.set(user, order[k - 1], 1.0);
            }
        }
        Some(s) => {
            for k in 1..s {
                m.set(0, order[k - 1], 1.0);
            }
            for k in s + 1..=channels {
                m.set(1, order[k - 1], 1.0);
            }
            let p = ((1.0 + tail[s] / r1(s) - head[s - 1] / r0(s)) / 2.0).clamp(0.0, 1.0);
            m.set(0, order[s - 1], p);
            m.set(1, order[s - 1], 1.0 - p);
        }
    }
    evaluate(
        rates,
        Allocation::from_matrix_unchecked(m),
        &Weights::uniform(2),
        0,
        cfg.zero_threshold,
    )
}
