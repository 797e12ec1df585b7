//! Throughput, utility, shadow-price and optimality computations.
//!
//! With weights `c`, the marginal utility of airtime for user `i` on
//! channel `k` is `g[i][k] = c[i] * b[i][k] / T[i]`. An allocation is
//! optimal iff, on every channel, all users holding airtime share the
//! largest marginal utility of that channel.

use crate::error::{Error, Result};
use crate::model::{Allocation, PfSolution, RateMatrix, Weights, FEASIBILITY_TOLERANCE};

fn check_shape(rates: &RateMatrix, alloc: &Allocation) -> Result<()> {
    if rates.num_users() != alloc.num_users() || rates.num_channels() != alloc.num_channels() {
        return Err(Error::dim(format!(
            "rates are {}x{}, allocation is {}x{}",
            rates.num_users(),
            rates.num_channels(),
            alloc.num_users(),
            alloc.num_channels()
        )));
    }
    Ok(())
}

fn check_positive(throughputs: &[f64]) -> Result<()> {
    if let Some(i) = throughputs.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::domain(format!(
            "throughput of user {i} is {} (must be positive)",
            throughputs[i]
        )));
    }
    Ok(())
}

/// `T[i] = sum_k P[i][k] * b[i][k]`.
pub fn throughputs(rates: &RateMatrix, alloc: &Allocation) -> Result<Vec<f64>> {
    check_shape(rates, alloc)?;
    Ok((0..rates.num_users())
        .map(|i| {
            rates
                .user_rates(i)
                .iter()
                .zip(alloc.user_fractions(i))
                .map(|(b, p)| b * p)
                .sum()
        })
        .collect())
}

/// Weighted proportional-fair utility `sum_i c[i] * ln T[i]`.
pub fn pf_objective(throughputs: &[f64], weights: &Weights) -> Result<f64> {
    weights.check_len(throughputs.len())?;
    check_positive(throughputs)?;
    Ok(throughputs
        .iter()
        .zip(weights.as_slice())
        .map(|(t, c)| c * t.ln())
        .sum())
}

/// Channel prices `lambda[k] = max_i c[i] * b[i][k] / T[i]`.
pub fn shadow_prices(rates: &RateMatrix, throughputs: &[f64], weights: &Weights) -> Result<Vec<f64>> {
    if throughputs.len() != rates.num_users() {
        return Err(Error::dim(format!(
            "{} throughputs for {} users",
            throughputs.len(),
            rates.num_users()
        )));
    }
    weights.check_len(rates.num_users())?;
    check_positive(throughputs)?;
    let c = weights.as_slice();
    Ok((0..rates.num_channels())
        .map(|k| {
            (0..rates.num_users())
                .map(|i| c[i] * rates.rate(i, k) / throughputs[i])
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Price-weighted airtime `E[i] = sum_k lambda[k] * P[i][k]`.
pub fn equivalent_airtime(alloc: &Allocation, prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() != alloc.num_channels() {
        return Err(Error::dim(format!(
            "{} prices for {} channels",
            prices.len(),
            alloc.num_channels()
        )));
    }
    Ok((0..alloc.num_users())
        .map(|i| {
            alloc
                .user_fractions(i)
                .iter()
                .zip(prices)
                .map(|(p, l)| p * l)
                .sum()
        })
        .collect())
}

/// Normalized violation of the optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub residual: f64,
}

impl KktReport {
    pub fn satisfied_at(&self, epsilon: f64) -> bool {
        self.residual <= epsilon
    }
}

/// For every channel, the largest relative gap `(lambda - g) / lambda`
/// between the channel's best marginal utility and that of any user
/// holding more than `zero_threshold` airtime on it.
///
/// Channels on which every user has rate zero contribute nothing.
pub fn kkt_residual(
    rates: &RateMatrix,
    alloc: &Allocation,
    weights: &Weights,
    zero_threshold: f64,
) -> Result<KktReport> {
    check_shape(rates, alloc)?;
    weights.check_len(rates.num_users())?;
    for k in 0..alloc.num_channels() {
        let sum = alloc.matrix().column_sum(k);
        if (sum - 1.0).abs() > FEASIBILITY_TOLERANCE {
            return Err(Error::Infeasible { channel: k, sum });
        }
    }
    let t = throughputs(rates, alloc)?;
    check_positive(&t)?;
    Ok(KktReport {
        residual: residual_unchecked(rates, alloc, weights.as_slice(), &t, zero_threshold),
    })
}

pub(crate) fn residual_unchecked(
    rates: &RateMatrix,
    alloc: &Allocation,
    weights: &[f64],
    t: &[f64],
    zero_threshold: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..rates.num_channels() {
        let best = (0..rates.num_users())
            .map(|i| weights[i] * rates.rate(i, k) / t[i])
            .fold(0.0, f64::max);
        if best <= 0.0 {
            continue;
        }
        for i in 0..rates.num_users() {
            if alloc.fraction(i, k) > zero_threshold {
                let g = weights[i] * rates.rate(i, k) / t[i];
                worst = worst.max((best - g) / best);
            }
        }
    }
    worst
}

/// Jain's fairness index `(sum T)^2 / (U * sum T^2)`.
pub fn jain_index(throughputs: &[f64]) -> Result<f64> {
    if throughputs.is_empty() {
        return Err(Error::domain("jain index of an empty vector"));
    }
    if throughputs.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::domain("throughputs must be finite and non-negative"));
    }
    let sum: f64 = throughputs.iter().sum();
    if sum == 0.0 {
        return Err(Error::domain("jain index undefined when every throughput is zero"));
    }
    let sum_sq: f64 = throughputs.iter().map(|t| t * t).sum();
    Ok(sum * sum / (throughputs.len() as f64 * sum_sq))
}

/// Assembles a [`PfSolution`] from an allocation, computing every derived field.
pub fn evaluate(
    rates: &RateMatrix,
    alloc: Allocation,
    weights: &Weights,
    iterations: usize,
    zero_threshold: f64,
) -> Result<PfSolution> {
    let t = throughputs(rates, &alloc)?;
    let objective = pf_objective(&t, weights)?;
    let prices = shadow_prices(rates, &t, weights)?;
    let residual = residual_unchecked(rates, &alloc, weights.as_slice(), &t, zero_threshold);
    Ok(PfSolution {
        allocation: alloc,
        throughputs: t,
        shadow_prices: prices,
        objective,
        iterations,
        kkt_residual: residual,
    })
}
