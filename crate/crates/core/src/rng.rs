//! Seed derivation. Every stochastic component draws from its own ChaCha
//! stream keyed by `(master seed, component name)`, so adding draws to one
//! component never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a 64-bit sub-seed for a named component.
pub fn derive_seed(master: u64, component: &str) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(component.as_bytes())))
}

/// Derive a sub-seed for an indexed item within a component (episode,
/// particle, grid cell, ...).
pub fn derive_indexed(master: u64, component: &str, index: u64) -> u64 {
    splitmix64(derive_seed(master, component) ^ splitmix64(index.wrapping_add(1)))
}

pub fn stream(master: u64, component: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(master, component))
}

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_are_distinct_and_stable() {
        let mut a = stream(7, "agent");
        let mut b = stream(7, "svpg");
        let mut a2 = stream(7, "agent");
        let xa: u64 = a.gen();
        assert_ne!(xa, b.gen::<u64>());
        assert_eq!(xa, a2.gen::<u64>());
        assert_ne!(derive_indexed(1, "episode", 0), derive_indexed(1, "episode", 1));
    }
}
