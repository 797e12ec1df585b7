//! Loop removal on the user/channel support graph of an optimal allocation.
//!
//! The support graph is bipartite with an edge `(i, k)` wherever user `i`
//! holds airtime on channel `k`. Along a cycle
//! `i1 k1 i2 k2 ... in kn`, optimality forces `b[i1][k1] / b[i2][k1] =
//! T[i1] / T[i2]` and so on around the loop, so the ratios
//!
//! ```text
//! d1 = b[i1][kn] / b[i1][k1],   dh = b[ih][k(h-1)] / b[ih][kh]  (h >= 2)
//! ```
//!
//! multiply to one. Moving `ch * D` airtime (with `ch = d1 ... dh`) from
//! `ih` to `i(h+1)` on every `kh` keeps every column sum and every user's
//! throughput fixed; choosing `D` as the smallest `P / ch` on the cycle
//! deletes at least one edge. Repeating until no cycle remains leaves at
//! most `U + S - 1` edges.

use crate::error::{Error, Result};
use crate::metrics::kkt_residual;
use crate::model::{Allocation, Matrix, RateMatrix, Weights};

use super::SolverConfig;

/// Diagnostics from one [`sparsify_weighted`] run.
#[derive(Debug, Clone, Default)]
pub struct SparsifyReport {
    /// Number of cycles broken.
    pub cycles: usize,
    /// Product of the ratios `d` around each cycle, in order.
    pub ratio_products: Vec<f64>,
}

/// Unweighted loop removal; see [`sparsify_weighted`].
pub fn sparsify(rates: &RateMatrix, alloc: &Allocation, cfg: &SolverConfig) -> Result<Allocation> {
    sparsify_weighted(rates, alloc, &Weights::uniform(rates.num_users()), cfg).map(|(a, _)| a)
}

/// Rewrites a KKT-optimal allocation into one with an acyclic support
/// graph and the same user throughputs.
pub fn sparsify_weighted(
    rates: &RateMatrix,
    alloc: &Allocation,
    weights: &Weights,
    cfg: &SolverConfig,
) -> Result<(Allocation, SparsifyReport)> {
    cfg.validate()?;
    let kkt = kkt_residual(rates, alloc, weights, cfg.zero_threshold)?;
    if !kkt.satisfied_at(cfg.kkt_tolerance) {
        return Err(Error::NotOptimal {
            residual: kkt.residual,
            tolerance: cfg.kkt_tolerance,
        });
    }
    let users = rates.num_users();
    let channels = rates.num_channels();
    let zero = cfg.zero_threshold;
    let mut p = alloc.matrix().clone();

    // On a channel where every rate is zero the airtime carries nothing;
    // hand it to a single user so it cannot close a loop.
    for k in 0..channels {
        if (0..users).all(|i| rates.rate(i, k) == 0.0) {
            let total = p.column_sum(k);
            for i in 0..users {
                p.set(i, k, 0.0);
            }
            p.set(0, k, total);
        }
    }

    let mut report = SparsifyReport::default();
    // Each pass deletes at least one of the at most U*S edges.
    for _ in 0..users * channels {
        let Some(cycle) = find_cycle(&p, zero) else {
            break;
        };
        let ratio_product = shift_along(&mut p, rates, &cycle);
        report.cycles += 1;
        report.ratio_products.push(ratio_product);
    }
    let out = Allocation::from_matrix_unchecked(p);
    Ok((out, report))
}

/// Alternating user/channel cycle `[i1, k1, i2, k2, ..., in, kn]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Cycle {
    pub users: Vec<usize>,
    pub channels: Vec<usize>,
}

/// Depth-first search from the lowest-index user; returns the first cycle
/// closed by a back edge. Vertices `0..U` are users, `U..U+S` channels.
pub(crate) fn find_cycle(p: &Matrix, zero: f64) -> Option<Cycle> {
    let users = p.rows();
    let channels = p.cols();
    let n = users + channels;
    let neighbors = |v: usize| -> Vec<usize> {
        if v < users {
            (0..channels)
                .filter(|&k| p.get(v, k) > zero)
                .map(|k| users + k)
                .collect()
        } else {
            let k = v - users;
            (0..users).filter(|&i| p.get(i, k) > zero).collect()
        }
    };

    let mut visited = vec![false; n];
    let mut stack_pos = vec![usize::MAX; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        // (vertex, parent, adjacency, next index)
        let mut stack: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();
        visited[root] = true;
        stack_pos[root] = 0;
        stack.push((root, usize::MAX, neighbors(root), 0));
        while let Some(top) = stack.last_mut() {
            let (v, parent) = (top.0, top.1);
            if top.3 == top.2.len() {
                stack_pos[v] = usize::MAX;
                stack.pop();
                continue;
            }
            let w = top.2[top.3];
            top.3 += 1;
            if w == parent {
                continue;
            }
            if visited[w] {
                if stack_pos[w] != usize::MAX {
                    let path: Vec<usize> = stack[stack_pos[w]..].iter().map(|e| e.0).collect();
                    return Some(to_cycle(path, users));
                }
                continue;
            }
            visited[w] = true;
            stack_pos[w] = stack.len();
            let adj = neighbors(w);
            stack.push((w, v, adj, 0));
        }
    }
    None
}

fn to_cycle(mut path: Vec<usize>, users: usize) -> Cycle {
    if path[0] >= users {
        path.rotate_left(1);
    }
    let users_on = path.iter().step_by(2).copied().collect();
    let channels_on = path.iter().skip(1).step_by(2).map(|v| v - users).collect();
    Cycle {
        users: users_on,
        channels: channels_on,
    }
}

/// Applies one loop-removal shift; returns the ratio product around the cycle.
pub(crate) fn shift_along(p: &mut Matrix, rates: &RateMatrix, cycle: &Cycle) -> f64 {
    let n = cycle.users.len();
    let user = |h: usize| cycle.users[h % n];
    let chan = |h: usize| cycle.channels[(h + n) % n];

    // coef[h] = d1 * ... * d(h+1), zero-based.
    let mut coef = Vec::with_capacity(n);
    let mut acc = 1.0;
    for h in 0..n {
        let d = if h == 0 {
            rates.rate(user(0), chan(n - 1)) / rates.rate(user(0), chan(0))
        } else {
            rates.rate(user(h), chan(h - 1)) / rates.rate(user(h), chan(h))
        };
        acc *= d;
        coef.push(acc);
    }

    // Candidates in order: (ih, kh) loses, (i(h+1), kh) gains.
    let mut best = f64::INFINITY;
    let mut best_edge = (0, 0);
    let mut sign = 1.0;
    for h in 0..n {
        let losing = p.get(user(h), chan(h)) / coef[h];
        if losing < best {
            best = losing;
            best_edge = (user(h), chan(h));
            sign = 1.0;
        }
        let gaining = p.get(user(h + 1), chan(h)) / coef[h];
        if gaining < best {
            best = gaining;
            best_edge = (user(h + 1), chan(h));
            sign = -1.0;
        }
    }
    for h in 0..n {
        let amount = sign * coef[h] * best;
        let (from, to, k) = (user(h), user(h + 1), chan(h));
        p.set(from, k, (p.get(from, k) - amount).clamp(0.0, 1.0));
        p.set(to, k, (p.get(to, k) + amount).clamp(0.0, 1.0));
    }
    p.set(best_edge.0, best_edge.1, 0.0);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::throughputs;
    use crate::solver::{solve_general, solve_two_user};

    #[test]
    fn hand_traced_cycle() {
        let b = RateMatrix::new(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let p = Allocation::uniform(2, 2);
        let (out, report) =
            sparsify_weighted(&b, &p, &Weights::uniform(2), &SolverConfig::default()).unwrap();
        assert_eq!(out.to_rows(), vec![vec![0.0, 0.75], vec![1.0, 0.25]]);
        assert_eq!(report.cycles, 1);
        assert_eq!(report.ratio_products, vec![1.0]);
        assert_eq!(throughputs(&b, &out).unwrap(), vec![1.5, 3.0]);
    }

    #[test]
    fn cycle_search_starts_at_first_user() {
        let p = Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let c = find_cycle(&p, 1e-9).unwrap();
        assert_eq!(c.users, vec![0, 1]);
        assert_eq!(c.channels, vec![0, 1]);
    }

    #[test]
    fn acyclic_input_unchanged() {
        let b = RateMatrix::new(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
        let p = Allocation::new(&[[1.0, 0.25], [0.0, 0.75]]).unwrap();
        let out = sparsify(&b, &p, &SolverConfig::default()).unwrap();
        assert_eq!(out, p);
        let s = solve_two_user(&b, &SolverConfig::default()).unwrap();
        assert_eq!(sparsify(&b, &s.allocation, &SolverConfig::default()).unwrap(), s.allocation);
    }

    #[test]
    fn rejects_non_optimal_input() {
        let b = RateMatrix::new(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
        let p = Allocation::uniform(2, 2);
        assert!(matches!(
            sparsify(&b, &p, &SolverConfig::default()),
            Err(Error::NotOptimal { .. })
        ));
    }

    #[test]
    fn proportional_rows_collapse_to_a_tree() {
        let row = [6.0, 12.0, 24.0, 48.0];
        let b = RateMatrix::new(&[row, row, row]).unwrap();
        let p = Allocation::uniform(3, 4);
        let (out, report) =
            sparsify_weighted(&b, &p, &Weights::uniform(3), &SolverConfig::default()).unwrap();
        assert!(report.cycles >= 1);
        // A forest on 3 users and 4 channels has at most 6 edges.
        assert!(out.support_size(1e-9) <= 6);
        assert!(find_cycle(out.matrix(), 1e-9).is_none());
        let before = throughputs(&b, &p).unwrap();
        let after = throughputs(&b, &out).unwrap();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() <= 1e-12 * x);
        }
        assert!(out.max_column_error() <= 1e-12);
    }

    #[test]
    fn solver_output_sparsifies() {
        let b = RateMatrix::new(&[
            [6.0, 12.0, 24.0],
            [12.0, 24.0, 48.0],
            [1.0, 2.0, 4.0],
            [9.0, 18.0, 36.0],
        ])
        .unwrap();
        let cfg = SolverConfig::default().with_tolerance(1e-12);
        let s = solve_general(&b, &Weights::uniform(4), &cfg).unwrap();
        let out = sparsify(&b, &s.allocation, &cfg).unwrap();
        assert!(find_cycle(out.matrix(), 1e-9).is_none());
    }
}
