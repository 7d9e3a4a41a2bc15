//! Counter-based random streams keyed by `(seed, trajectory, iteration)`.
//!
//! Every iteration of every trajectory draws from its own ChaCha8 stream, so
//! results do not depend on which worker runs what or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The stream for one `(seed, trajectory, iteration)` key.
pub fn stream(seed: u64, trajectory: u64, iteration: u64) -> ChaCha8Rng {
    let a = splitmix(seed);
    let b = splitmix(a ^ trajectory.rotate_left(17));
    let c = splitmix(b ^ iteration.rotate_left(41));
    let mut key = [0u8; 32];
    for (k, word) in [a, b, c, splitmix(c)].iter().enumerate() {
        key[8 * k..8 * k + 8].copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform direction on the sphere as `(θ, φ)`.
pub fn haar_axis<R: Rng>(rng: &mut R) -> (f64, f64) {
    let c: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (c.clamp(-1.0, 1.0).acos(), phi)
}

/// Uniform in `[lo, hi]`, exactly `lo` for a zero-width window.
pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        // still consume one variate so stream layout does not depend on the width
        let _: f64 = rng.random();
        return lo;
    }
    rng.random_range(lo..=hi)
}
