//! Independent checks on solver output.
//!
//! [`oracle_solve`] maximizes the same utility by plain projected
//! gradient ascent with an exact Euclidean projection of every channel
//! column onto the probability simplex. It shares no code with the
//! solvers in [`crate::solver`].

use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::model::{Allocation, Matrix, PfSolution, RateMatrix, Weights, DEFAULT_ZERO_THRESHOLD};

const ORACLE_MAX_ITERATIONS: usize = 1_000_000;

/// Euclidean projection of `v` onto `{x : x >= 0, sum x = 1}` by sorting.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        prefix += x;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn project_columns(m: &Matrix) -> Matrix {
    let columns: Vec<Vec<f64>> = (0..m.cols()).map(|k| project_simplex(&m.column(k))).collect();
    Matrix::from_columns(&columns, m.rows())
}

fn utility(rates: &RateMatrix, p: &Matrix, weights: &[f64]) -> (f64, Vec<f64>) {
    let t: Vec<f64> = (0..rates.num_users())
        .map(|i| {
            rates
                .user_rates(i)
                .iter()
                .zip(p.row(i))
                .map(|(b, x)| b * x)
                .sum()
        })
        .collect();
    let y = if t.iter().all(|&x| x > 0.0) {
        t.iter().zip(weights).map(|(x, c)| c * x.ln()).sum()
    } else {
        f64::NEG_INFINITY
    };
    (y, t)
}

/// Projected gradient ascent; see the module docs.
pub fn oracle_solve(rates: &RateMatrix, weights: &Weights, tol: f64) -> Result<PfSolution> {
    oracle_solve_observed(rates, weights, tol, |_| {})
}

/// As [`oracle_solve`], passing every accepted iterate's throughputs to `observe`.
pub fn oracle_solve_observed<F>(
    rates: &RateMatrix,
    weights: &Weights,
    tol: f64,
    mut observe: F,
) -> Result<PfSolution>
where
    F: FnMut(&[f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("oracle tolerance must be positive".into()));
    }
    weights.check_len(rates.num_users())?;
    let users = rates.num_users();
    let channels = rates.num_channels();
    let c = weights.as_slice();

    // Everyone starts on their best channel.
    let mut start = Matrix::zeros(users, channels);
    for i in 0..users {
        let row = rates.user_rates(i);
        let best = (0..channels)
            .fold(0, |best, k| if row[k] > row[best] { k } else { best });
        start.set(i, best, 1.0);
    }
    let mut p = project_columns(&start);
    let (mut y, mut t) = utility(rates, &p, c);
    observe(&t);

    let gradient_step = |p: &Matrix, t: &[f64], step: f64| -> Matrix {
        let mut q = p.clone();
        for i in 0..users {
            for k in 0..channels {
                q.set(i, k, p.get(i, k) + step * c[i] * rates.rate(i, k) / t[i]);
            }
        }
        project_columns(&q)
    };

    for iteration in 0..ORACLE_MAX_ITERATIONS {
        let probe = gradient_step(&p, &t, 1.0);
        let norm = probe
            .as_slice()
            .iter()
            .zip(p.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if norm <= tol {
            return finish(rates, &p, weights, iteration);
        }
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-30 {
            let candidate = if step == 1.0 {
                probe.clone()
            } else {
                gradient_step(&p, &t, step)
            };
            let (cy, ct) = utility(rates, &candidate, c);
            if cy > y {
                p = candidate;
                y = cy;
                t = ct;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No ascent at any representable step: stationary to machine precision.
            return finish(rates, &p, weights, iteration);
        }
        observe(&t);
    }
    let solution = finish(rates, &p, weights, ORACLE_MAX_ITERATIONS)?;
    Err(Error::NotConverged {
        solution: Box::new(solution),
    })
}

fn finish(rates: &RateMatrix, p: &Matrix, weights: &Weights, iterations: usize) -> Result<PfSolution> {
    let alloc = Allocation::from_matrix(p.clone())?;
    evaluate(rates, alloc, weights, iterations, DEFAULT_ZERO_THRESHOLD)
}

/// True iff `a` is at least `b` everywhere and larger somewhere by more than `1e-12`.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "cannot compare {} throughputs with {}",
            a.len(),
            b.len()
        )));
    }
    let weakly = a.iter().zip(b).all(|(x, y)| x >= y);
    let strictly = a.iter().zip(b).any(|(x, y)| x - y > 1e-12);
    Ok(weakly && strictly)
}

/// Channels with two or more users above `zero_threshold`.
pub fn shared_channel_count(alloc: &Allocation, zero_threshold: f64) -> usize {
    (0..alloc.num_channels())
        .filter(|&k| {
            (0..alloc.num_users())
                .filter(|&i| alloc.fraction(i, k) > zero_threshold)
                .count()
                >= 2
        })
        .count()
}

fn channels_used(alloc: &Allocation, user: usize, zero_threshold: f64) -> usize {
    alloc
        .user_fractions(user)
        .iter()
        .filter(|&&p| p > zero_threshold)
        .count()
}

/// Users holding airtime above `zero_threshold` on two or more channels.
pub fn multi_channel_user_count(alloc: &Allocation, zero_threshold: f64) -> usize {
    (0..alloc.num_users())
        .filter(|&i| channels_used(alloc, i, zero_threshold) >= 2)
        .count()
}

/// Users holding airtime above `zero_threshold` on exactly one channel.
pub fn single_channel_user_count(alloc: &Allocation, zero_threshold: f64) -> usize {
    (0..alloc.num_users())
        .filter(|&i| channels_used(alloc, i, zero_threshold) == 1)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[1.0, 1.0]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[0.0, 0.0, 0.0, 0.0]), vec![0.25; 4]);
        assert_eq!(project_simplex(&[3.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.9, 0.4, -2.0]);
        assert_abs_diff_eq!(p[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.25, epsilon = 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn oracle_worked_example() {
        let b = RateMatrix::new(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
        let s = oracle_solve(&b, &Weights::uniform(2), 1e-12).unwrap();
        assert_abs_diff_eq!(s.objective, 1.2163953243, epsilon = 1e-6);
    }

    #[test]
    fn oracle_single_channel_weights() {
        let b = RateMatrix::new(&[[2.0], [5.0], [1.0]]).unwrap();
        let w = Weights::new(vec![1.0, 2.0, 1.0]).unwrap();
        let tol = 1e-10;
        let s = oracle_solve(&b, &w, tol).unwrap();
        let expected = [0.25, 0.5, 0.25];
        for i in 0..3 {
            assert_abs_diff_eq!(s.allocation.fraction(i, 0), expected[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn dominance() {
        assert!(pareto_dominates(&[2.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(!pareto_dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(pareto_dominates(&[1.5, 2.25], &[1.5, 2.0]).unwrap());
        assert!(!pareto_dominates(&[1.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(pareto_dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn structure_counts() {
        let p = Allocation::new(&[[1.0, 0.25], [0.0, 0.75]]).unwrap();
        assert_eq!(shared_channel_count(&p, 1e-9), 1);
        assert_eq!(multi_channel_user_count(&p, 1e-9), 1);
        assert_eq!(single_channel_user_count(&p, 1e-9), 1);

        let p = Allocation::new(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(shared_channel_count(&p, 1e-9), 0);
        assert_eq!(single_channel_user_count(&p, 1e-9), 3);

        let p = Allocation::uniform(3, 4);
        assert_eq!(shared_channel_count(&p, 1e-9), 4);
        assert_eq!(multi_channel_user_count(&p, 1e-9), 3);
    }
}
