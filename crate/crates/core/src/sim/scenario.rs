//! Simulation parameters and the SNR-to-rate table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of the rate table: the minimum SNR for a rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateStep {
    pub min_snr_db: f64,
    pub rate_mbps: f64,
}

/// Ordered SNR thresholds with their rates. The first threshold is always
/// `-inf`, so every SNR maps to some rate (possibly zero).
///
/// In JSON this is an array of `[threshold, rate]` pairs with `null` for
/// the leading `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Option<f64>, f64)>", into = "Vec<(Option<f64>, f64)>")]
pub struct RateTable {
    steps: Vec<RateStep>,
}

impl RateTable {
    pub fn new(steps: Vec<RateStep>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::InvalidScenario("rate table is empty".into()))?;
        if first.min_snr_db != f64::NEG_INFINITY {
            return Err(Error::InvalidScenario(
                "the first rate table entry must cover -inf".into(),
            ));
        }
        if steps.iter().any(|s| !(s.rate_mbps.is_finite() && s.rate_mbps >= 0.0)) {
            return Err(Error::InvalidScenario("rates must be finite and non-negative".into()));
        }
        for pair in steps.windows(2) {
            if !(pair[1].min_snr_db > pair[0].min_snr_db && pair[1].min_snr_db.is_finite()) {
                return Err(Error::InvalidScenario(
                    "rate table thresholds must be finite and strictly increasing".into(),
                ));
            }
            if !(pair[1].rate_mbps > pair[0].rate_mbps) {
                return Err(Error::InvalidScenario(
                    "rate table rates must be strictly increasing".into(),
                ));
            }
        }
        Ok(RateTable { steps })
    }

    /// 802.11a/g rates with their minimum SNRs.
    pub fn ieee80211ag() -> Self {
        let pairs = [
            (f64::NEG_INFINITY, 0.0),
            (6.0, 1.0),
            (10.0, 6.0),
            (11.0, 9.0),
            (12.0, 12.0),
            (13.0, 18.0),
            (16.0, 24.0),
            (19.0, 36.0),
            (26.0, 48.0),
            (29.0, 54.0),
        ];
        let steps = pairs
            .iter()
            .map(|&(min_snr_db, rate_mbps)| RateStep {
                min_snr_db,
                rate_mbps,
            })
            .collect();
        RateTable { steps }
    }

    pub fn steps(&self) -> &[RateStep] {
        &self.steps
    }

    /// Largest rate whose threshold is at most `snr_db`.
    pub fn rate(&self, snr_db: f64) -> f64 {
        let above = self.steps.partition_point(|s| s.min_snr_db <= snr_db);
        self.steps[above.max(1) - 1].rate_mbps
    }
}

impl Default for RateTable {
    fn default() -> Self {
        RateTable::ieee80211ag()
    }
}

impl TryFrom<Vec<(Option<f64>, f64)>> for RateTable {
    type Error = Error;

    fn try_from(pairs: Vec<(Option<f64>, f64)>) -> Result<Self> {
        let steps = pairs
            .into_iter()
            .map(|(snr, rate)| RateStep {
                min_snr_db: snr.unwrap_or(f64::NEG_INFINITY),
                rate_mbps: rate,
            })
            .collect();
        RateTable::new(steps)
    }
}

impl From<RateTable> for Vec<(Option<f64>, f64)> {
    fn from(table: RateTable) -> Self {
        table
            .steps
            .iter()
            .map(|s| {
                let snr = (s.min_snr_db != f64::NEG_INFINITY).then_some(s.min_snr_db);
                (snr, s.rate_mbps)
            })
            .collect()
    }
}

/// Where stations are placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// Uniform over the whole torus.
    #[default]
    Uniform,
    /// A fraction `load_fraction` of the stations inside the cell of AP 0,
    /// the rest uniform over the other cells.
    Hotspot { load_fraction: f64 },
}

impl Distribution {
    /// Hotspot load fraction, or `0` for uniform placement.
    pub fn load(&self) -> f64 {
        match *self {
            Distribution::Uniform => 0.0,
            Distribution::Hotspot { load_fraction } => load_fraction,
        }
    }
}

/// A simulated deployment: an AP grid on a torus, path loss with
/// log-normal shadowing, and how many stations to drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Distance between neighbouring APs, meters.
    pub ap_spacing: f64,
    pub num_stas: usize,
    pub distribution: Distribution,
    pub pathloss_exponent: f64,
    pub shadowing_sigma_db: f64,
    /// Mean SNR at `edge_distance` from an AP.
    pub edge_snr_db: f64,
    /// Defaults to the AP-to-corner distance of a square cell,
    /// `ap_spacing / sqrt(2)`.
    pub edge_distance: Option<f64>,
    pub min_distance: f64,
    /// Stations below this throughput (Mbit/s) count as in outage.
    pub outage_threshold: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub rate_table: RateTable,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            grid_rows: 4,
            grid_cols: 4,
            ap_spacing: 20.0,
            num_stas: 64,
            distribution: Distribution::Uniform,
            pathloss_exponent: 3.0,
            shadowing_sigma_db: 6.0,
            edge_snr_db: 10.0,
            edge_distance: None,
            min_distance: 1.0,
            outage_threshold: 1.0,
            replications: 500,
            master_seed: 0,
            rate_table: RateTable::default(),
        }
    }
}

impl Scenario {
    pub fn num_aps(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn extent_x(&self) -> f64 {
        self.grid_cols as f64 * self.ap_spacing
    }

    pub fn extent_y(&self) -> f64 {
        self.grid_rows as f64 * self.ap_spacing
    }

    pub fn edge_distance(&self) -> f64 {
        self.edge_distance
            .unwrap_or(self.ap_spacing * std::f64::consts::FRAC_1_SQRT_2)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidScenario(msg.into()));
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return bad("the AP grid needs at least one row and one column");
        }
        if !(self.ap_spacing > 0.0 && self.ap_spacing.is_finite()) {
            return bad("ap_spacing must be positive");
        }
        if self.num_stas == 0 {
            return bad("num_stas must be at least 1");
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 0.0) {
            return bad("pathloss_exponent must be non-negative");
        }
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return bad("shadowing_sigma_db must be non-negative");
        }
        if !self.edge_snr_db.is_finite() {
            return bad("edge_snr_db must be finite");
        }
        if !(self.edge_distance() > 0.0 && self.edge_distance().is_finite()) {
            return bad("edge_distance must be positive");
        }
        if !(self.min_distance > 0.0 && self.min_distance.is_finite()) {
            return bad("min_distance must be positive");
        }
        if !(self.outage_threshold.is_finite() && self.outage_threshold >= 0.0) {
            return bad("outage_threshold must be non-negative");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if let Distribution::Hotspot { load_fraction: f } = self.distribution {
            let floor = 1.0 / self.num_aps() as f64;
            if !(f >= floor - 1e-12 && f <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "hotspot load fraction {f} must lie in [1/{}, 1]",
                    self.num_aps()
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::InvalidScenario(format!("scenario JSON: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lookup() {
        let t = RateTable::default();
        assert_eq!(t.rate(15.0), 18.0);
        assert_eq!(t.rate(12.5), 12.0);
        assert_eq!(t.rate(5.0), 0.0);
        assert_eq!(t.rate(29.0), 54.0);
        assert_eq!(t.rate(28.999), 48.0);
        assert_eq!(t.rate(6.0), 1.0);
        assert_eq!(t.rate(f64::NEG_INFINITY), 0.0);
        assert_eq!(t.rate(1e9), 54.0);
    }

    #[test]
    fn table_json_round_trip() {
        let t = RateTable::default();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with("[[null,0.0],[6.0,1.0]"), "{text}");
        let back: RateTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn table_validation() {
        let bad = |pairs: &str| serde_json::from_str::<RateTable>(pairs).is_err();
        assert!(bad("[]"));
        assert!(bad("[[0, 0]]"));
        assert!(bad("[[null, 0], [5, 1], [5, 2]]"));
        assert!(bad("[[null, 0], [5, 2], [6, 1]]"));
        assert!(!bad("[[null, 0], [5, 1]]"));
    }

    #[test]
    fn scenario_defaults_and_json() {
        let sc = Scenario::from_json("{}").unwrap();
        assert_eq!(sc.num_aps(), 16);
        assert_eq!(sc.extent_x(), 80.0);
        assert!((sc.edge_distance() - 20.0 / 2f64.sqrt()).abs() < 1e-12);
        let sc = Scenario::from_json(r#"{"edge_distance": 10}"#).unwrap();
        assert_eq!(sc.edge_distance(), 10.0);
        let sc = Scenario::from_json(
            r#"{"num_stas": 8, "distribution": {"hotspot": {"load_fraction": 0.25}}}"#,
        )
        .unwrap();
        assert_eq!(sc.distribution.load(), 0.25);
        assert_eq!(Scenario::from_json(r#"{"distribution": "uniform"}"#).unwrap().distribution.load(), 0.0);
    }

    #[test]
    fn scenario_rejects_bad_values() {
        assert!(Scenario::from_json(r#"{"ap_spacing": 0}"#).is_err());
        assert!(Scenario::from_json(r#"{"distribution": {"hotspot": {"load_fraction": 0.05}}}"#).is_err());
        assert!(Scenario::from_json(r#"{"distribution": {"hotspot": {"load_fraction": 1.5}}}"#).is_err());
        assert!(Scenario::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(Scenario::from_json(r#"{"replications": 0}"#).is_err());
    }
}
