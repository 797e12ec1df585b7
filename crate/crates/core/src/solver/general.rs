//! Iterative solver for any number of users and channels.
//!
//! Every iteration sweeps the channels in index order. On channel `k`,
//! users holding airtime plus idle users whose marginal utility reaches
//! the running average form the active set; the reference `R` is the mean
//! marginal utility over that set. Airtime moves along
//! `delta[i] = g[i] - R`, which sums to zero, so the channel stays fully
//! used. The step is capped so that no entry leaves `[0, 1]` and no entry
//! moves by more than `step_fraction`, and within that cap it is chosen by
//! an exact line search on the utility. Throughputs are refreshed after
//! each channel, so every move is an ascent step from the current point.
//!
//! Moving all channels at once against a shared snapshot does not work
//! here: the combined move has to be scaled back, and users whose airtime
//! should vanish then only shrink geometrically and never leave the
//! support.

use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::model::{Allocation, PfSolution, RateMatrix, Weights};

use super::SolverConfig;

/// Relative size below which a channel's direction is treated as zero.
const DIRECTION_NOISE: f64 = 1e-14;

/// Fraction of its former value below which a shrinking entry is zeroed.
const DUST: f64 = 8.0 * f64::EPSILON;

/// Rounding allowance, relative to the airtime entries, when checking that
/// a step did not lose utility.
const ROUNDING: f64 = 16.0 * f64::EPSILON;

/// Search direction and admissible step for one channel.
#[derive(Debug, Clone)]
pub(crate) struct ChannelDirection {
    pub delta: Vec<f64>,
    /// Largest step keeping every entry in `[0, 1]` and within the move cap.
    pub max_step: f64,
    /// User whose airtime reaches exactly zero at `max_step`, if that is
    /// the binding limit.
    pub vanishing: Option<usize>,
}

/// Builds the update direction for one channel from its airtime column,
/// rate column, the throughput snapshot and the weights.
pub(crate) fn channel_direction(
    airtime: &[f64],
    rates: &[f64],
    throughputs: &[f64],
    weights: &[f64],
    step_fraction: f64,
) -> Option<ChannelDirection> {
    let users = airtime.len();
    let grad: Vec<f64> = (0..users)
        .map(|i| weights[i] * rates[i] / throughputs[i])
        .collect();

    let supported: Vec<bool> = airtime.iter().map(|&p| p > 0.0).collect();
    let mean_over = |set: &[bool]| -> f64 {
        let (sum, n) = set
            .iter()
            .zip(&grad)
            .filter(|(&m, _)| m)
            .fold((0.0, 0usize), |(s, n), (_, g)| (s + g, n + 1));
        sum / n as f64
    };

    // Grow the active set with idle users at or above the reference until
    // the set is stable; the reference is non-decreasing along the way.
    let mut reference = mean_over(&supported);
    let mut active = supported.clone();
    for _ in 0..=users {
        let next: Vec<bool> = (0..users)
            .map(|i| supported[i] || grad[i] >= reference)
            .collect();
        reference = mean_over(&next);
        if next == active {
            break;
        }
        active = next;
    }

    let mut delta: Vec<f64> = (0..users)
        .map(|i| if active[i] { grad[i] - reference } else { 0.0 })
        .collect();
    // Gradients equal up to rounding give a direction made of noise.
    let top = grad.iter().fold(0.0_f64, |m, &g| m.max(g));
    let largest = delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if !(largest > DIRECTION_NOISE * top) {
        return None;
    }
    for d in delta.iter_mut() {
        if d.abs() <= DIRECTION_NOISE * top {
            *d = 0.0;
        }
    }
    let members = delta.iter().filter(|&&d| d != 0.0).count() as f64;
    let drift = delta.iter().sum::<f64>() / members;
    for d in delta.iter_mut().filter(|d| **d != 0.0) {
        *d -= drift;
    }

    let mut max_step = step_fraction / largest;
    let mut vanishing = None;
    for i in 0..users {
        let d = delta[i];
        if d > 0.0 {
            let mut room = 1.0 - airtime[i];
            if room <= 0.0 && supported[i] {
                // Rounding can leave dust elsewhere next to a full entry.
                room = (0..users).filter(|&j| j != i).map(|j| airtime[j]).sum();
            }
            max_step = max_step.min(room / d);
        }
    }
    for i in 0..users {
        let d = delta[i];
        if d < 0.0 && supported[i] {
            let limit = airtime[i] / -d;
            if limit <= max_step {
                max_step = limit;
                vanishing = Some(i);
            }
        }
    }
    Some(ChannelDirection {
        delta,
        max_step,
        vanishing,
    })
}

/// Maximizes `sum_j w_j ln(a_j + t d_j)` over `t` in `[0, t_max]`, given a
/// positive slope at zero. The function is concave in `t`.
fn maximize_log_sum(terms: &[(f64, f64, f64)], t_max: f64) -> f64 {
    // Slope, and the sum of its absolute terms as a rounding scale.
    let slope = |t: f64| -> (f64, f64) {
        terms.iter().fold((0.0, 0.0), |(s, m), &(w, a, d)| {
            let x = a + t * d;
            if x > 0.0 {
                let v = w * d / x;
                (s + v, m + v.abs())
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        })
    };
    let curvature = |t: f64| -> f64 {
        terms
            .iter()
            .map(|&(w, a, d)| {
                let x = a + t * d;
                -w * d * d / (x * x)
            })
            .sum()
    };
    if slope(t_max).0 >= 0.0 {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    let mut t = 0.0;
    for _ in 0..100 {
        let (s, scale) = slope(t);
        if t > 0.0 && s.abs() <= 4.0 * f64::EPSILON * scale {
            return t;
        }
        if s > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let newton = t - s / curvature(t);
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    lo
}

/// Puts the rounding drift of a column sum on its largest entry.
fn restore_column_sum(col: &mut [f64]) {
    let drift = col.iter().sum::<f64>() - 1.0;
    let mut largest = 0;
    for i in 1..col.len() {
        if col[i] > col[largest] {
            largest = i;
        }
    }
    col[largest] = (col[largest] - drift).clamp(0.0, 1.0);
}

struct State<'a> {
    rate_columns: &'a [Vec<f64>],
    weights: &'a [f64],
    users: usize,
}

impl State<'_> {
    fn throughputs(&self, airtime: &[Vec<f64>]) -> Vec<f64> {
        let mut t = vec![0.0; self.users];
        for (p, b) in airtime.iter().zip(self.rate_columns) {
            for i in 0..self.users {
                t[i] += p[i] * b[i];
            }
        }
        t
    }

    fn objective(&self, t: &[f64]) -> f64 {
        t.iter().zip(self.weights).map(|(t, c)| c * t.ln()).sum()
    }

    fn residual(&self, airtime: &[Vec<f64>], t: &[f64], zero_threshold: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, b) in airtime.iter().zip(self.rate_columns) {
            let grad = |i: usize| self.weights[i] * b[i] / t[i];
            let best = (0..self.users).map(grad).fold(0.0, f64::max);
            if best <= 0.0 {
                continue;
            }
            for i in 0..self.users {
                if p[i] > zero_threshold {
                    worst = worst.max((best - grad(i)) / best);
                }
            }
        }
        worst
    }
}

/// Solves the weighted problem from the equal-split starting point.
pub fn solve_general(rates: &RateMatrix, weights: &Weights, cfg: &SolverConfig) -> Result<PfSolution> {
    solve_general_observed(rates, weights, cfg, |_, _| {})
}

/// As [`solve_general`], reporting `(iteration, objective)` after the
/// initial point and after every accepted update.
pub fn solve_general_observed<F>(
    rates: &RateMatrix,
    weights: &Weights,
    cfg: &SolverConfig,
    mut observe: F,
) -> Result<PfSolution>
where
    F: FnMut(usize, f64),
{
    cfg.validate()?;
    weights.check_len(rates.num_users())?;
    let users = rates.num_users();
    let channels = rates.num_channels();
    let rate_columns: Vec<Vec<f64>> = (0..channels).map(|k| rates.channel_rates(k)).collect();
    let state = State {
        rate_columns: &rate_columns,
        weights: weights.as_slice(),
        users,
    };

    let mut airtime = vec![vec![1.0 / users as f64; users]; channels];
    let mut t = state.throughputs(&airtime);
    observe(0, state.objective(&t));

    let finish = |airtime: &[Vec<f64>], iterations: usize| -> Result<PfSolution> {
        let alloc = Allocation::from_columns_unchecked(airtime, users);
        evaluate(rates, alloc, weights, iterations, cfg.zero_threshold)
    };

    let mut iterations = 0;
    loop {
        if state.residual(&airtime, &t, cfg.zero_threshold) <= cfg.kkt_tolerance {
            log::debug!("{users}x{channels} converged after {iterations} sweeps");
            return finish(&airtime, iterations);
        }
        if iterations >= cfg.max_iterations {
            let solution = finish(&airtime, iterations)?;
            return Err(Error::NotConverged {
                solution: Box::new(solution),
            });
        }

        let mut moved = false;
        for k in 0..channels {
            let Some(dir) = channel_direction(
                &airtime[k],
                &rate_columns[k],
                &t,
                state.weights,
                cfg.step_fraction,
            ) else {
                continue;
            };
            let b = &rate_columns[k];
            let terms: Vec<(f64, f64, f64)> = (0..users)
                .filter(|&i| dir.delta[i] != 0.0)
                .map(|i| (state.weights[i], t[i], dir.delta[i] * b[i]))
                .collect();
            let step = maximize_log_sum(&terms, dir.max_step);
            if !(step > 0.0) {
                continue;
            }
            let col = &mut airtime[k];
            let before = col.clone();
            for i in 0..users {
                if dir.delta[i] != 0.0 {
                    col[i] = (col[i] + step * dir.delta[i]).clamp(0.0, 1.0);
                }
            }
            if step == dir.max_step {
                if let Some(i) = dir.vanishing {
                    col[i] = 0.0;
                }
            }
            // Entries driven to rounding dust have vanished too.
            for i in 0..users {
                if dir.delta[i] < 0.0 && col[i] <= DUST * before[i] {
                    col[i] = 0.0;
                }
            }
            restore_column_sum(col);
            let changes: Vec<f64> = (0..users).map(|i| (col[i] - before[i]) * b[i]).collect();
            // The line search makes this an ascent step. Near the optimum the
            // true gain is below the rounding error of the airtime entries,
            // so only a loss larger than that error marks the step as bad.
            let mut channel_gain = 0.0;
            let mut slack = 0.0;
            for i in 0..users {
                slack += state.weights[i] * b[i] / t[i] * col[i].max(before[i]);
                if changes[i] != 0.0 {
                    channel_gain += state.weights[i] * (changes[i] / t[i]).ln_1p();
                }
            }
            if channel_gain >= -ROUNDING * slack {
                moved = true;
                for i in 0..users {
                    t[i] += changes[i];
                }
            } else {
                col.copy_from_slice(&before);
            }
        }
        iterations += 1;
        t = state.throughputs(&airtime);
        if !moved {
            log::debug!("{users}x{channels} stalled after {iterations} sweeps");
            let solution = finish(&airtime, iterations)?;
            return Err(Error::NotConverged {
                solution: Box::new(solution),
            });
        }
        observe(iterations, state.objective(&t));
    }
}
