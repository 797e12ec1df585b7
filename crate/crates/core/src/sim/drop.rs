//! One random placement of stations and the resulting rate matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Matrix, RateMatrix};

use super::propagation::{mean_snr_db, sample_snr_db, snr_to_rate, torus_distance, Point};
use super::scenario::{Distribution, Scenario};

/// Stations, APs, and the per-pair SNR and rate for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Drop {
    pub ap_positions: Vec<Point>,
    pub sta_positions: Vec<Point>,
    /// `U x S` shadowed SNR in dB.
    pub snr_db: Matrix,
    /// `U x S` rates in Mbit/s, including stations that reach no AP.
    pub rates: Matrix,
    /// Stations with a positive rate to at least one AP, in index order.
    pub eligible_users: Vec<usize>,
}

impl Drop {
    pub fn num_stas(&self) -> usize {
        self.sta_positions.len()
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    /// Rate matrix restricted to the eligible stations.
    pub fn eligible_rates(&self) -> Result<RateMatrix> {
        if self.eligible_users.is_empty() {
            return Err(Error::InvalidScenario("no station reaches any AP".into()));
        }
        let rows: Vec<&[f64]> = self.eligible_users.iter().map(|&i| self.rates.row(i)).collect();
        RateMatrix::new(&rows)
    }
}

/// Random generator for one replication: ChaCha8 keyed by the master seed,
/// with the replication index as the stream number.
pub fn replication_rng(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// Places APs on the grid and draws station positions and shadowing.
///
/// Draw order: station positions in index order (`x` then `y`), then one
/// shadowing sample per (station, AP) pair in row-major order. In hotspot
/// mode the first `round(f * U)` stations land in the square of side
/// `ap_spacing` centred on AP 0 and the rest are drawn uniformly over the
/// torus, redrawing any that fall inside that square.
pub fn generate_drop(sc: &Scenario, replication: u64) -> Result<Drop> {
    sc.validate()?;
    let mut rng = replication_rng(sc.master_seed, replication);
    let (ex, ey) = (sc.extent_x(), sc.extent_y());

    let ap_positions: Vec<Point> = (0..sc.grid_rows)
        .flat_map(|r| {
            (0..sc.grid_cols)
                .map(move |c| Point::new(c as f64 * sc.ap_spacing, r as f64 * sc.ap_spacing))
        })
        .collect();

    let users = sc.num_stas;
    let half = sc.ap_spacing / 2.0;
    let hotspot = ap_positions[0];
    let in_hotspot = |p: Point| {
        let dx = (p.x - hotspot.x).abs();
        let dy = (p.y - hotspot.y).abs();
        dx.min(ex - dx) < half && dy.min(ey - dy) < half
    };
    let in_hot_count = match sc.distribution {
        Distribution::Uniform => 0,
        Distribution::Hotspot { load_fraction } => {
            ((load_fraction * users as f64).round() as usize).min(users)
        }
    };
    let mut sta_positions = Vec::with_capacity(users);
    for i in 0..users {
        let p = if i < in_hot_count {
            let x = hotspot.x + rng.random_range(-half..half);
            let y = hotspot.y + rng.random_range(-half..half);
            Point::new(x.rem_euclid(ex), y.rem_euclid(ey))
        } else {
            loop {
                let p = Point::new(rng.random_range(0.0..ex), rng.random_range(0.0..ey));
                let excluded = matches!(sc.distribution, Distribution::Hotspot { .. }) && in_hotspot(p);
                if !excluded {
                    break p;
                }
            }
        };
        sta_positions.push(p);
    }

    let aps = ap_positions.len();
    let mut snr_db = Matrix::zeros(users, aps);
    let mut rates = Matrix::zeros(users, aps);
    for (i, &sta) in sta_positions.iter().enumerate() {
        for (k, &ap) in ap_positions.iter().enumerate() {
            let mean = mean_snr_db(torus_distance(sta, ap, ex, ey), sc);
            let snr = sample_snr_db(mean, sc.shadowing_sigma_db, &mut rng);
            snr_db.set(i, k, snr);
            rates.set(i, k, snr_to_rate(snr, &sc.rate_table));
        }
    }
    let eligible_users = (0..users)
        .filter(|&i| rates.row(i).iter().any(|&r| r > 0.0))
        .collect();

    Ok(Drop {
        ap_positions,
        sta_positions,
        snr_db,
        rates,
        eligible_users,
    })
}
