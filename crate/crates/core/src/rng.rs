//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream keyed by
//! `(seed, domain, index)`: the seed is the user's, the domain separates
//! unrelated consumers (graph sampling, slope directions, ...) and the index
//! is the sample's position in its output list. A work item therefore sees
//! the same numbers no matter which worker runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Stream = ChaCha8Rng;

/// Stream domains. Values are arbitrary but fixed forever: changing one
/// changes every seeded output of the crate.
pub mod domain {
    pub const GRAPH: u64 = 0x67_72_61_70_68;
    pub const NEIGHBOR: u64 = 0x6e_65_69_67_68;
    pub const SLOPE: u64 = 0x73_6c_6f_70_65;
    pub const RANGE_DIR: u64 = 0x72_61_6e_67_65;
    pub const SHELL: u64 = 0x73_68_65_6c_6c;
    pub const ORACLE: u64 = 0x6f_72_61_63_6c;
    pub const POINTS: u64 = 0x70_6f_69_6e_74;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes extra key material (a level number, a shell index) into a seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// The stream for item `index` of the consumer `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, domain));
    rng.set_stream(index);
    rng
}

pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// A uniformly distributed unit vector in `dim` dimensions.
pub fn unit_vector(rng: &mut Stream, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// A point uniform in the closed ball `B(center, radius)`.
pub fn in_ball(rng: &mut Stream, center: &[f64], radius: f64) -> Vec<f64> {
    let dir = unit_vector(rng, center.len());
    let r = radius * rng.random::<f64>().powf(1.0 / center.len() as f64);
    center.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
}
