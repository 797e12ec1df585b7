//! Any number of users, two channels.
//!
//! Sorting users by `b[i][0] / b[i][1]` from large to small, some optimum
//! puts a prefix of the users on channel 0 and the rest on channel 1, each
//! group splitting its channel equally, with at most the boundary user on
//! both channels.

use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::model::{Allocation, Matrix, PfSolution, RateMatrix, Weights};

use super::single::uniform_matrix;
use super::{ratio_order, SolverConfig};

pub fn solve_two_channel(rates: &RateMatrix, cfg: &SolverConfig) -> Result<PfSolution> {
    cfg.validate()?;
    if rates.num_channels() != 2 {
        return Err(Error::Usage(format!(
            "two-channel solver needs exactly 2 channels, got {}",
            rates.num_channels()
        )));
    }
    let users = rates.num_users();
    let c0 = rates.channel_rates(0);
    let c1 = rates.channel_rates(1);
    let finish = |m: Matrix| {
        evaluate(
            rates,
            Allocation::from_matrix_unchecked(m),
            &Weights::uniform(users),
            0,
            cfg.zero_threshold,
        )
    };

    // A channel nobody can use leaves a single-channel problem; its own
    // airtime is split evenly and carries no throughput.
    if users == 1 || c0.iter().all(|&b| b == 0.0) || c1.iter().all(|&b| b == 0.0) {
        return finish(uniform_matrix(users, 2));
    }

    let order = ratio_order(&c0, &c1);
    let a = |i: usize| c0[order[i - 1]];
    let b = |i: usize| c1[order[i - 1]];
    let n = users as f64;

    // b0/b1 of user i compared with u/(U-u), by cross-multiplication.
    let below = |i: usize, u: usize| a(i) * (n - u as f64) < u as f64 * b(i);
    let above = |i: usize, u: usize| a(i) * (n - u as f64) > u as f64 * b(i);

    let (mut lo, mut hi) = (1, users);
    let mut split = users / 2;
    let shared = loop {
        if lo == hi {
            break Some(lo);
        }
        split = split.clamp(lo, hi - 1);
        if below(split, split) {
            hi = split;
        } else if above(split + 1, split) {
            lo = split + 1;
        } else {
            break None;
        }
        split = (lo + hi) / 2;
    };

    let mut m = Matrix::zeros(users, 2);
    match shared {
        None => {
            let u = split as f64;
            for i in 1..=users {
                if i <= split {
                    m.set(order[i - 1], 0, 1.0 / u);
                } else {
                    m.set(order[i - 1], 1, 1.0 / (n - u));
                }
            }
        }
        Some(s) => {
            let u = s as f64;
            let on_first = ((n - u + 1.0) / n - (u - 1.0) / n * b(s) / a(s)).clamp(0.0, 1.0);
            let on_second = (u / n - (n - u) / n * a(s) / b(s)).clamp(0.0, 1.0);
            m.set(order[s - 1], 0, on_first);
            m.set(order[s - 1], 1, on_second);
            for i in 1..s {
                m.set(order[i - 1], 0, (1.0 - on_first) / (u - 1.0));
            }
            for i in s + 1..=users {
                m.set(order[i - 1], 1, (1.0 - on_second) / (n - u));
            }
        }
    }
    finish(m)
}
