//! The four association and airtime schemes compared in the simulator.
//!
//! - MT: every AP serves only the stations with its highest rate, splitting
//!   airtime equally among ties.
//! - SS-TF: each station joins its strongest AP; members of a cell get
//!   equal throughput.
//! - SS-AF: strongest-AP association with equal airtime per member.
//! - PF: the joint proportional-fair optimum over all APs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Matrix;
use crate::solver::{solve_general, SolverConfig};
use crate::model::Weights;

use super::drop::Drop;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "PF")]
    Pf,
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "SS-TF")]
    SsTf,
    #[serde(rename = "SS-AF")]
    SsAf,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Pf, Scheme::Mt, Scheme::SsTf, Scheme::SsAf];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Pf => "PF",
            Scheme::Mt => "MT",
            Scheme::SsTf => "SS-TF",
            Scheme::SsAf => "SS-AF",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown scheme {s:?}; expected PF, MT, SS-TF or SS-AF")))
    }
}

/// Airtime of every station on every AP, and the resulting throughputs.
///
/// Rows cover all placed stations; stations that reach no AP have an
/// all-zero row and zero throughput. Columns of APs that serve nobody are
/// all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub airtime: Matrix,
    pub throughputs: Vec<f64>,
}

impl SchemeOutcome {
    fn from_airtime(airtime: Matrix, rates: &Matrix) -> Self {
        let throughputs = (0..airtime.rows())
            .map(|i| airtime.row(i).iter().zip(rates.row(i)).map(|(p, b)| p * b).sum())
            .collect();
        SchemeOutcome {
            airtime,
            throughputs,
        }
    }

    pub fn total_throughput(&self) -> f64 {
        self.throughputs.iter().sum()
    }
}

/// Maximum throughput: each AP shares its airtime equally among the
/// stations with the highest rate on it. An AP that no station reaches
/// stays idle.
pub fn allocate_mt(d: &Drop) -> SchemeOutcome {
    let mut airtime = Matrix::zeros(d.num_stas(), d.num_aps());
    for k in 0..d.num_aps() {
        let column = d.rates.column(k);
        let best = column.iter().fold(0.0_f64, |m, &r| m.max(r));
        if best <= 0.0 {
            continue;
        }
        let winners: Vec<usize> = (0..column.len()).filter(|&i| column[i] == best).collect();
        let share = 1.0 / winners.len() as f64;
        for i in winners {
            airtime.set(i, k, share);
        }
    }
    SchemeOutcome::from_airtime(airtime, &d.rates)
}

/// Strongest-signal AP of every station, or `None` when the station gets
/// no rate there. Ties go to the lower AP index.
pub fn strongest_ap(d: &Drop) -> Vec<Option<usize>> {
    (0..d.num_stas())
        .map(|i| {
            let snr = d.snr_db.row(i);
            let best = (0..snr.len()).fold(0, |best, k| if snr[k] > snr[best] { k } else { best });
            (d.rates.get(i, best) > 0.0).then_some(best)
        })
        .collect()
}

fn cells(d: &Drop) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); d.num_aps()];
    for (i, ap) in strongest_ap(d).into_iter().enumerate() {
        if let Some(k) = ap {
            members[k].push(i);
        }
    }
    members
}

/// Strongest-signal association with equal throughput inside each cell:
/// airtime proportional to `1 / b`.
pub fn allocate_sstf(d: &Drop) -> SchemeOutcome {
    let mut airtime = Matrix::zeros(d.num_stas(), d.num_aps());
    for (k, members) in cells(d).into_iter().enumerate() {
        let inverse_sum: f64 = members.iter().map(|&i| 1.0 / d.rates.get(i, k)).sum();
        for &i in &members {
            airtime.set(i, k, (1.0 / d.rates.get(i, k)) / inverse_sum);
        }
    }
    SchemeOutcome::from_airtime(airtime, &d.rates)
}

/// Strongest-signal association with equal airtime inside each cell.
pub fn allocate_ssaf(d: &Drop) -> SchemeOutcome {
    let mut airtime = Matrix::zeros(d.num_stas(), d.num_aps());
    for (k, members) in cells(d).into_iter().enumerate() {
        let share = 1.0 / members.len() as f64;
        for &i in &members {
            airtime.set(i, k, share);
        }
    }
    SchemeOutcome::from_airtime(airtime, &d.rates)
}

/// Proportional fairness over all APs jointly, solved on the eligible
/// stations. Fails if the solver does not converge.
pub fn allocate_pf(d: &Drop, cfg: &SolverConfig) -> Result<SchemeOutcome> {
    let mut airtime = Matrix::zeros(d.num_stas(), d.num_aps());
    if !d.eligible_users.is_empty() {
        let rates = d.eligible_rates()?;
        let solution = solve_general(&rates, &Weights::uniform(rates.num_users()), cfg)?;
        for (row, &i) in d.eligible_users.iter().enumerate() {
            for k in 0..d.num_aps() {
                airtime.set(i, k, solution.allocation.fraction(row, k));
            }
        }
    }
    Ok(SchemeOutcome::from_airtime(airtime, &d.rates))
}

pub fn allocate(scheme: Scheme, d: &Drop, cfg: &SolverConfig) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Pf => allocate_pf(d, cfg),
        Scheme::Mt => Ok(allocate_mt(d)),
        Scheme::SsTf => Ok(allocate_sstf(d)),
        Scheme::SsAf => Ok(allocate_ssaf(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::propagation::Point;
    use approx::assert_abs_diff_eq;

    /// A drop with given rates; SNR ordering follows the rates with ties
    /// broken towards lower AP index.
    fn drop_with(rates: &[&[f64]]) -> Drop {
        let rates = Matrix::from_rows(rates).unwrap();
        let users = rates.rows();
        let aps = rates.cols();
        let eligible_users = (0..users).filter(|&i| rates.row(i).iter().any(|&r| r > 0.0)).collect();
        Drop {
            ap_positions: vec![Point::new(0.0, 0.0); aps],
            sta_positions: vec![Point::new(0.0, 0.0); users],
            snr_db: rates.clone(),
            rates,
            eligible_users,
        }
    }

    #[test]
    fn mt_splits_ties() {
        let d = drop_with(&[&[54.0], &[54.0], &[6.0]]);
        let out = allocate_mt(&d);
        assert_eq!(out.airtime.column(0), vec![0.5, 0.5, 0.0]);
        assert_eq!(out.throughputs, vec![27.0, 27.0, 0.0]);
    }

    #[test]
    fn mt_disjoint_winners_and_idle_channel() {
        let d = drop_with(&[&[54.0, 6.0, 0.0], &[6.0, 48.0, 0.0]]);
        let out = allocate_mt(&d);
        assert_eq!(out.throughputs, vec![54.0, 48.0]);
        assert_eq!(out.airtime.column(2), vec![0.0, 0.0]);
    }

    #[test]
    fn sstf_equalizes_throughput() {
        let d = drop_with(&[&[54.0, 1.0], &[6.0, 1.0]]);
        let out = allocate_sstf(&d);
        assert_abs_diff_eq!(out.throughputs[0], 5.4, epsilon = 1e-12);
        assert_abs_diff_eq!(out.throughputs[1], 5.4, epsilon = 1e-12);
        assert_abs_diff_eq!(out.airtime.get(0, 0), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(out.airtime.get(1, 0), 0.9, epsilon = 1e-12);
        let single = allocate_sstf(&drop_with(&[&[24.0, 1.0]]));
        assert_eq!(single.throughputs, vec![24.0]);
    }

    #[test]
    fn ssaf_equal_airtime() {
        let d = drop_with(&[&[54.0, 1.0], &[6.0, 1.0]]);
        assert_eq!(allocate_ssaf(&d).throughputs, vec![27.0, 3.0]);
        let d = drop_with(&[&[12.0], &[12.0], &[12.0]]);
        assert_eq!(allocate_ssaf(&d).throughputs, vec![4.0, 4.0, 4.0]);
    }

    #[test]
    fn unreachable_station_gets_nothing() {
        let d = drop_with(&[&[12.0, 6.0], &[0.0, 0.0]]);
        for scheme in Scheme::ALL {
            let out = allocate(scheme, &d, &SolverConfig::default()).unwrap();
            assert_eq!(out.throughputs[1], 0.0, "{scheme}");
            assert_eq!(out.airtime.row(1), &[0.0, 0.0]);
        }
    }

    #[test]
    fn pf_on_worked_example() {
        let d = drop_with(&[&[1.0, 2.0], &[1.0, 3.0]]);
        let out = allocate_pf(&d, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(out.throughputs[0], 1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(out.throughputs[1], 2.25, epsilon = 1e-6);
    }

    #[test]
    fn strongest_ap_ties_go_low() {
        let d = drop_with(&[&[12.0, 12.0], &[6.0, 9.0]]);
        assert_eq!(strongest_ap(&d), vec![Some(0), Some(1)]);
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("ss-af".parse::<Scheme>().unwrap(), Scheme::SsAf);
        assert!("XX".parse::<Scheme>().is_err());
    }
}
