//! Distances on the torus and the SNR model.

use rand::Rng;
use rand_distr::{Distribution as _, Normal};

use super::scenario::{RateTable, Scenario};

/// A position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

fn wrapped(delta: f64, extent: f64) -> f64 {
    let d = delta.abs();
    d.min(extent - d)
}

/// Euclidean distance with wrap-around on both axes.
pub fn torus_distance(p: Point, q: Point, extent_x: f64, extent_y: f64) -> f64 {
    wrapped(p.x - q.x, extent_x).hypot(wrapped(p.y - q.y, extent_y))
}

/// Mean SNR at distance `d`, before shadowing.
pub fn mean_snr_db(d: f64, sc: &Scenario) -> f64 {
    let d = d.max(sc.min_distance);
    sc.edge_snr_db + 10.0 * sc.pathloss_exponent * (sc.edge_distance() / d).log10()
}

/// Adds a zero-mean Gaussian shadowing term (in dB) to `mean`.
pub fn sample_snr_db<R: Rng + ?Sized>(mean: f64, sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db == 0.0 {
        return mean;
    }
    let normal = Normal::new(0.0, sigma_db).expect("sigma is finite and non-negative");
    mean + normal.sample(rng)
}

pub fn snr_to_rate(snr_db: f64, table: &RateTable) -> f64 {
    table.rate(snr_db)
}
