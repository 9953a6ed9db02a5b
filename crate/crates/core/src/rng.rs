//! Seeded ChaCha8 streams.
//!
//! One base seed fans out into independent streams addressed by
//! `(domain, index)`: the domain tag occupies the top 16 bits of the ChaCha
//! stream id, the index the low 48. Per-sample and per-trial work draws
//! from its own stream, so results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DOMAIN_SAMPLE: u64 = 1;
pub const DOMAIN_TRUTH: u64 = 2;
pub const DOMAIN_PARTITION: u64 = 3;
pub const DOMAIN_LEMMA: u64 = 4;
pub const DOMAIN_INIT: u64 = 5;
pub const DOMAIN_RESTART: u64 = 6;
pub const DOMAIN_CHECK: u64 = 7;

pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 48));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 48) | index);
    rng
}

/// Uniform direction on the unit sphere in `d` dimensions.
pub fn unit_vector<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = crate::linalg::norm(&g);
        if n > 1e-12 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Uniform point in the ball of the given radius.
pub fn in_ball<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    let u = unit_vector(rng, d);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    u.into_iter().map(|v| v * r).collect()
}
