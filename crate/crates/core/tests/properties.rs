use pfair_core::solver::{
    individual_channel_baseline, solve_general, solve_two_channel, solve_two_user, sparsify,
    sparsify_weighted,
};
use pfair_core::verify::{
    multi_channel_user_count, oracle_solve, pareto_dominates, shared_channel_count,
    single_channel_user_count,
};
use pfair_core::{
    equivalent_airtime, jain_index, kkt_residual, pf_objective, shadow_prices, throughputs,
    Allocation, RateMatrix, SolverConfig, Weights,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEVELS: [f64; 10] = [0.0, 1.0, 6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];
const ZERO: f64 = 1e-9;

fn cfg(tol: f64) -> SolverConfig {
    SolverConfig::default().with_tolerance(tol)
}

/// Rate matrix with entries from the 802.11a/g rate set and no all-zero row.
fn rates(users: std::ops::RangeInclusive<usize>, channels: std::ops::RangeInclusive<usize>, positive: bool) -> impl Strategy<Value = RateMatrix> {
    let lo = usize::from(positive);
    (users, channels).prop_flat_map(move |(u, s)| {
        prop::collection::vec(prop::collection::vec(lo..LEVELS.len(), s), u).prop_map(|rows| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|row| {
                    let mut row: Vec<f64> = row.into_iter().map(|j| LEVELS[j]).collect();
                    if row.iter().all(|&b| b == 0.0) {
                        row[0] = 1.0;
                    }
                    row
                })
                .collect();
            RateMatrix::new(&rows).unwrap()
        })
    })
}

/// Random interior allocation: every column a normalized positive vector.
fn interior_allocation(users: usize, channels: usize, seed: u64) -> Allocation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![vec![0.0; channels]; users];
    for k in 0..channels {
        let raw: Vec<f64> = (0..users).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for i in 0..users {
            columns[i][k] = raw[i] / sum;
        }
    }
    Allocation::new(&columns).unwrap()
}

fn assert_stochastic(p: &Allocation) {
    for k in 0..p.num_channels() {
        let column = p.channel_fractions(k);
        assert!(column.iter().all(|&x| (0.0..=1.0).contains(&x)), "{column:?}");
        let sum: f64 = column.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "channel {k} sums to {sum}");
    }
}

fn acyclic(p: &Allocation) -> bool {
    let (users, channels) = (p.num_users(), p.num_channels());
    let mut parent: Vec<usize> = (0..users + channels).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    for i in 0..users {
        for k in 0..channels {
            if p.fraction(i, k) > ZERO {
                let (a, b) = (root(&mut parent, i), root(&mut parent, users + k));
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
    }
    true
}

fn check_corollaries(p: &Allocation) {
    let (u, s) = (p.num_users(), p.num_channels());
    assert!(shared_channel_count(p, ZERO) <= s.min(u - 1));
    assert!(multi_channel_user_count(p, ZERO) <= u.min(s - 1));
    assert!(single_channel_user_count(p, ZERO) >= (u + 1).saturating_sub(s));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_difference(
        b in rates(2..=6, 1..=6, true),
        seed in any::<u64>(),
        pick in any::<(usize, usize, usize)>(),
    ) {
        let (u, s) = (b.num_users(), b.num_channels());
        let c: Vec<f64> = (0..u).map(|i| 0.5 + i as f64 * 0.7).collect();
        let w = Weights::new(c.clone()).unwrap();
        let p = interior_allocation(u, s, seed);
        let (i, k) = (pick.0 % u, pick.2 % s);
        let j = (i + 1 + pick.1 % (u - 1)) % u;
        let h = 1e-6;
        // Move h of channel k's airtime from user j to user i and back.
        let shifted = |sign: f64| {
            let mut rows = p.to_rows();
            rows[i][k] += sign * h;
            rows[j][k] -= sign * h;
            let q = Allocation::new(&rows).unwrap();
            pf_objective(&throughputs(&b, &q).unwrap(), &w).unwrap()
        };
        let numeric = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        let t = throughputs(&b, &p).unwrap();
        let analytic = c[i] * b.rate(i, k) / t[i] - c[j] * b.rate(j, k) / t[j];
        let scale = (c[i] * b.rate(i, k) / t[i]).max(c[j] * b.rate(j, k) / t[j]);
        prop_assert!((numeric - analytic).abs() <= 1e-4 * scale, "{numeric} vs {analytic}");
    }

    #[test]
    fn jain_is_scale_invariant(
        t in prop::collection::vec(0.0f64..100.0, 1..40),
        alpha in 1e-3f64..1e3,
    ) {
        prop_assume!(t.iter().any(|&x| x > 0.0));
        let scaled: Vec<f64> = t.iter().map(|x| alpha * x).collect();
        let (a, b) = (jain_index(&t).unwrap(), jain_index(&scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn general_solver_is_optimal_and_feasible(b in rates(2..=8, 2..=8, false), seed in 0u64..4) {
        let u = b.num_users();
        let w = if seed == 0 {
            Weights::uniform(u)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Weights::new((0..u).map(|_| rng.random_range(0.5..=4.0)).collect()).unwrap()
        };
        let s = solve_general(&b, &w, &cfg(1e-8)).unwrap();
        assert_stochastic(&s.allocation);
        prop_assert!(kkt_residual(&b, &s.allocation, &w, ZERO).unwrap().residual <= 1e-8);

        // Equal equivalent airtime, weighted by c.
        let prices = shadow_prices(&b, &s.throughputs, &w).unwrap();
        let e = equivalent_airtime(&s.allocation, &prices).unwrap();
        for (e, c) in e.iter().zip(w.as_slice()) {
            prop_assert!((e - c).abs() <= 1e-4, "E {e} vs c {c}");
        }
        // No user's marginal utility exceeds its channel's price.
        for k in 0..b.num_channels() {
            for i in 0..u {
                let g = w.as_slice()[i] * b.rate(i, k) / s.throughputs[i];
                prop_assert!(g <= prices[k] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn joint_optimum_beats_separate_channels(b in rates(2..=8, 2..=8, true)) {
        let s = solve_general(&b, &Weights::uniform(b.num_users()), &cfg(1e-12)).unwrap();
        for (t, base) in s.throughputs.iter().zip(individual_channel_baseline(&b)) {
            prop_assert!(*t >= base - 1e-9, "{t} < {base}");
        }
    }

    #[test]
    fn two_user_solver_matches_general(b in rates(2..=2, 1..=32, true)) {
        let special = solve_two_user(&b, &cfg(1e-8)).unwrap();
        let general = solve_general(&b, &Weights::uniform(2), &cfg(1e-8)).unwrap();
        assert_stochastic(&special.allocation);
        prop_assert!(special.kkt_residual <= 1e-8);
        prop_assert!((special.objective - general.objective).abs() <= 1e-6);
    }

    #[test]
    fn two_channel_solver_matches_general(b in rates(1..=64, 2..=2, true)) {
        let u = b.num_users();
        let special = solve_two_channel(&b, &cfg(1e-8)).unwrap();
        let general = solve_general(&b, &Weights::uniform(u), &cfg(1e-8)).unwrap();
        assert_stochastic(&special.allocation);
        prop_assert!(special.kkt_residual <= 1e-8);
        prop_assert!((special.objective - general.objective).abs() <= 1e-6);
    }

    #[test]
    fn sparsify_keeps_throughputs_and_removes_cycles(b in rates(2..=8, 2..=8, false), proportional in any::<bool>()) {
        let (u, s) = (b.num_users(), b.num_channels());
        let tight = cfg(1e-12);
        let (b, p) = if proportional {
            // Scaled copies of one row: the uniform split is optimal.
            let base = b.user_rates(0).to_vec();
            let rows: Vec<Vec<f64>> = (0..u).map(|i| base.iter().map(|x| x * (1 + i % 3) as f64).collect()).collect();
            (RateMatrix::new(&rows).unwrap(), Allocation::uniform(u, s))
        } else {
            let p = solve_general(&b, &Weights::uniform(u), &tight).unwrap().allocation;
            (b, p)
        };
        let (q, report) = sparsify_weighted(&b, &p, &Weights::uniform(u), &tight).unwrap();
        assert_stochastic(&q);
        prop_assert!(acyclic(&q));
        check_corollaries(&q);
        let before = throughputs(&b, &p).unwrap();
        let after = throughputs(&b, &q).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-9 * x, "{x} -> {y}");
        }
        prop_assert_eq!(report.ratio_products.len(), report.cycles);
        for product in report.ratio_products {
            prop_assert!((product - 1.0).abs() <= 1e-9, "ratio product {product}");
        }
    }

    #[test]
    fn oracle_agrees_with_solver(b in rates(2..=8, 2..=8, false)) {
        let w = Weights::uniform(b.num_users());
        let s = solve_general(&b, &w, &cfg(1e-8)).unwrap();
        let o = oracle_solve(&b, &w, 1e-9).unwrap();
        assert_stochastic(&o.allocation);
        prop_assert!((o.objective - s.objective).abs() <= 1e-5);
        prop_assert!(o.objective <= s.objective + 1e-5);
    }
}

#[test]
fn corollaries_at_extreme_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for (u, s) in [(64, 2), (2, 64)] {
        let rows: Vec<Vec<f64>> = (0..u)
            .map(|_| (0..s).map(|_| LEVELS[rng.random_range(1..LEVELS.len())]).collect())
            .collect();
        let b = RateMatrix::new(&rows).unwrap();
        let p = solve_general(&b, &Weights::uniform(u), &cfg(1e-12)).unwrap().allocation;
        let q = sparsify(&b, &p, &cfg(1e-12)).unwrap();
        assert!(acyclic(&q));
        check_corollaries(&q);
    }
}

#[test]
fn random_perturbations_never_dominate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let u = rng.random_range(2..=6);
        let s = rng.random_range(2..=6);
        let rows: Vec<Vec<f64>> = (0..u)
            .map(|_| (0..s).map(|_| LEVELS[rng.random_range(1..LEVELS.len())]).collect())
            .collect();
        let b = RateMatrix::new(&rows).unwrap();
        let best = solve_general(&b, &Weights::uniform(u), &cfg(1e-12)).unwrap();
        for _ in 0..1000 {
            // Shift a random amount of one channel's airtime between two users.
            let mut q = best.allocation.to_rows();
            let k = rng.random_range(0..s);
            let (i, j) = (rng.random_range(0..u), rng.random_range(0..u));
            let amount = rng.random_range(0.0..=1.0) * q[j][k];
            q[j][k] -= amount;
            q[i][k] += amount;
            let q = Allocation::new(&q).unwrap();
            let t = throughputs(&b, &q).unwrap();
            assert!(!pareto_dominates(&t, &best.throughputs).unwrap());
        }
    }
}

#[test]
fn every_solver_output_is_column_stochastic() {
    let b = RateMatrix::new(&[[1.0, 2.0], [1.0, 3.0]]).unwrap();
    let w = Weights::uniform(2);
    assert_stochastic(&solve_general(&b, &w, &cfg(1e-8)).unwrap().allocation);
    assert_stochastic(&solve_two_user(&b, &cfg(1e-8)).unwrap().allocation);
    assert_stochastic(&solve_two_channel(&b, &cfg(1e-8)).unwrap().allocation);
    assert_stochastic(&oracle_solve(&b, &w, 1e-10).unwrap().allocation);
    assert_stochastic(&sparsify(&b, &Allocation::new(&[[1.0, 0.25], [0.0, 0.75]]).unwrap(), &cfg(1e-8)).unwrap());
}
