use crate::error::Result;
use crate::metrics::evaluate;
use crate::model::{Allocation, Matrix, PfSolution, RateMatrix, Weights, DEFAULT_ZERO_THRESHOLD};
use crate::Error;

/// Closed-form optimum for one channel: airtime proportional to weight.
pub fn solve_single_channel(rates: &RateMatrix, weights: &Weights) -> Result<PfSolution> {
    if rates.num_channels() != 1 {
        return Err(Error::Usage(format!(
            "single-channel solver needs exactly one channel, got {}",
            rates.num_channels()
        )));
    }
    weights.check_len(rates.num_users())?;
    let total: f64 = weights.as_slice().iter().sum();
    let column: Vec<f64> = weights.as_slice().iter().map(|c| c / total).collect();
    let alloc = Allocation::from_columns_unchecked(&[column], rates.num_users());
    evaluate(rates, alloc, weights, 0, DEFAULT_ZERO_THRESHOLD)
}

/// Throughputs when every channel is split equally among all users:
/// `T'[i] = sum_k b[i][k] / U`.
pub fn individual_channel_baseline(rates: &RateMatrix) -> Vec<f64> {
    let users = rates.num_users() as f64;
    (0..rates.num_users())
        .map(|i| rates.user_rates(i).iter().sum::<f64>() / users)
        .collect()
}

/// Equal split of every channel, used where a channel's airtime is irrelevant.
pub(crate) fn uniform_matrix(users: usize, channels: usize) -> Matrix {
    Matrix::filled(users, channels, 1.0 / users as f64)
}
