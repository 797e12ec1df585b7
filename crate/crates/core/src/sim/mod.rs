//! Monte-Carlo comparison of allocation schemes on a torus of WLAN cells.
//!
//! APs sit on a square grid with wrap-around. Every station reaches every
//! AP at a rate set by path loss, log-normal shadowing and the SNR-to-rate
//! table; each AP is one channel of the rate matrix. A replication draws
//! one placement and evaluates every requested scheme on it.

mod drop;
mod propagation;
mod scenario;
mod schemes;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::jain_index;
use crate::solver::SolverConfig;

pub use drop::{generate_drop, replication_rng, Drop};
pub use propagation::{mean_snr_db, sample_snr_db, snr_to_rate, torus_distance, Point};
pub use scenario::{Distribution, RateStep, RateTable, Scenario};
pub use schemes::{
    allocate, allocate_mt, allocate_pf, allocate_ssaf, allocate_sstf, strongest_ap, Scheme,
    SchemeOutcome,
};

/// Metrics of one scheme on one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub scheme: Scheme,
    pub num_stas: usize,
    /// Hotspot load fraction, `0` for uniform placement.
    pub hotspot_load: f64,
    pub replication: u64,
    pub total_throughput: f64,
    pub jain: f64,
    pub outage_prob: f64,
}

/// A replication dropped because one of its schemes failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFailure {
    pub num_stas: usize,
    pub hotspot_load: f64,
    pub replication: u64,
    pub scheme: Scheme,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResults {
    /// Ordered by replication, then scheme.
    pub records: Vec<MetricsRecord>,
    pub failures: Vec<ReplicationFailure>,
}

/// Jain's index over all placed stations; `0` when nobody gets anything.
fn fairness(throughputs: &[f64]) -> f64 {
    jain_index(throughputs).unwrap_or(0.0)
}

/// Metrics of one scheme outcome.
pub fn record(
    sc: &Scenario,
    scheme: Scheme,
    replication: u64,
    outcome: &SchemeOutcome,
) -> MetricsRecord {
    let t = &outcome.throughputs;
    let outages = t.iter().filter(|&&x| x < sc.outage_threshold).count();
    MetricsRecord {
        scheme,
        num_stas: sc.num_stas,
        hotspot_load: sc.distribution.load(),
        replication,
        total_throughput: outcome.total_throughput(),
        jain: fairness(t),
        outage_prob: outages as f64 / t.len() as f64,
    }
}

fn run_replication(
    sc: &Scenario,
    schemes: &[Scheme],
    cfg: &SolverConfig,
    replication: u64,
) -> std::result::Result<Vec<MetricsRecord>, ReplicationFailure> {
    let fail = |scheme: Scheme, e: Error| ReplicationFailure {
        num_stas: sc.num_stas,
        hotspot_load: sc.distribution.load(),
        replication,
        scheme,
        message: e.to_string(),
    };
    let d = generate_drop(sc, replication).map_err(|e| fail(schemes[0], e))?;
    schemes
        .iter()
        .map(|&scheme| {
            allocate(scheme, &d, cfg)
                .map(|outcome| record(sc, scheme, replication, &outcome))
                .map_err(|e| fail(scheme, e))
        })
        .collect()
}

/// Runs every replication of `sc`, optionally in parallel. Output does not
/// depend on `parallel`: each replication owns its random stream and the
/// records are sorted by (replication, scheme).
pub fn run_experiment(
    sc: &Scenario,
    schemes: &[Scheme],
    cfg: &SolverConfig,
    parallel: bool,
) -> Result<ExperimentResults> {
    sc.validate()?;
    cfg.validate()?;
    let mut schemes = schemes.to_vec();
    schemes.sort();
    schemes.dedup();
    if schemes.is_empty() {
        return Err(Error::Usage("no schemes requested".into()));
    }
    log::info!(
        "simulating U={} load={} over {} replications",
        sc.num_stas,
        sc.distribution.load(),
        sc.replications
    );
    let reps = 0..sc.replications as u64;
    let outcomes: Vec<_> = if parallel {
        reps.into_par_iter()
            .map(|r| run_replication(sc, &schemes, cfg, r))
            .collect()
    } else {
        reps.map(|r| run_replication(sc, &schemes, cfg, r)).collect()
    };

    let mut results = ExperimentResults::default();
    for outcome in outcomes {
        match outcome {
            Ok(records) => results.records.extend(records),
            Err(failure) => {
                log::warn!(
                    "replication {} (U={}, load={}) dropped: {} failed: {}",
                    failure.replication,
                    failure.num_stas,
                    failure.hotspot_load,
                    failure.scheme,
                    failure.message
                );
                results.failures.push(failure);
            }
        }
    }
    Ok(results)
}

pub const RESULTS_HEADER: &str =
    "scheme,num_stas,hotspot_load,replication,total_throughput_mbps,jain_index,outage_prob";

/// Fixed-point decimal with six significant digits.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Results CSV with header, one line per record.
pub fn format_results_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme,
            r.num_stas,
            format_significant(r.hotspot_load),
            r.replication,
            format_significant(r.total_throughput),
            format_significant(r.jain),
            format_significant(r.outage_prob),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(1.0), "1.00000");
        assert_eq!(format_significant(1234.56789), "1234.57");
        assert_eq!(format_significant(0.000123456789), "0.000123457");
        assert_eq!(format_significant(0.0625), "0.0625000");
        assert_eq!(format_significant(1234567.0), "1234567");
    }

    #[test]
    fn csv_layout() {
        let r = MetricsRecord {
            scheme: Scheme::SsTf,
            num_stas: 16,
            hotspot_load: 0.0,
            replication: 3,
            total_throughput: 123.456789,
            jain: 0.5,
            outage_prob: 0.125,
        };
        assert_eq!(
            format_results_csv(&[r]),
            format!("{RESULTS_HEADER}\nSS-TF,16,0,3,123.457,0.500000,0.125000\n")
        );
    }

    fn small() -> Scenario {
        Scenario {
            num_stas: 12,
            replications: 6,
            master_seed: 5,
            ..Scenario::default()
        }
    }

    #[test]
    fn records_sorted_and_reproducible() {
        let sc = small();
        let cfg = SolverConfig::default();
        let a = run_experiment(&sc, &[Scheme::SsAf, Scheme::Pf, Scheme::Mt], &cfg, true).unwrap();
        let b = run_experiment(&sc, &[Scheme::Mt, Scheme::Pf, Scheme::SsAf], &cfg, false).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert_eq!(a.records.len(), 18);
        let keys: Vec<(u64, Scheme)> = a.records.iter().map(|r| (r.replication, r.scheme)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn outage_counts_every_station() {
        let sc = small();
        let d = generate_drop(&sc, 0).unwrap();
        let out = allocate_ssaf(&d);
        let r = record(&sc, Scheme::SsAf, 0, &out);
        let expected = out.throughputs.iter().filter(|&&t| t < 1.0).count() as f64 / 12.0;
        assert_eq!(r.outage_prob, expected);
    }
}
