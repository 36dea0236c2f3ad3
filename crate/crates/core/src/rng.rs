//! Seed derivation. All randomness flows from explicit `u64` seeds; there is
//! no ambient generator anywhere in the crate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout. ChaCha output is stable across platforms
/// and crate versions, which the byte-identical result files rely on.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a stream tag. Distinct tags give
/// statistically independent children; the mapping is pure.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Derives a seed along a path of tags, e.g. `[replication, candidate]`.
pub fn derive_path(parent: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(parent, |s, &t| derive_seed(s, t))
}

/// Stream tags used by the library so that different consumers of the same
/// parent seed never share a stream.
pub mod stream {
    pub const OUTSOURCE: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const TRAJECTORY: u64 = 3;
    pub const RANDOM_START: u64 = 4;
    pub const CHAIN_INIT: u64 = 5;
    pub const INSTANCE: u64 = 6;
    pub const INNER: u64 = 7;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_pure_and_tag_sensitive() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
        assert_eq!(derive_path(1, &[2, 3]), derive_seed(derive_seed(1, 2), 3));
    }
}
