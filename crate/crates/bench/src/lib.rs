//! Instance generators shared by the benchmarks.

use pfair_core::RateMatrix;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rate levels of an 802.11a/g radio in Mbit/s.
pub const LEVELS: [f64; 8] = [6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];

/// Seeded random rate matrix with entries drawn from [`LEVELS`].
pub fn rate_matrix(users: usize, channels: usize, seed: u64) -> RateMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..users)
        .map(|_| (0..channels).map(|_| *LEVELS.choose(&mut rng).unwrap()).collect())
        .collect();
    RateMatrix::new(&rows).expect("positive rates")
}
