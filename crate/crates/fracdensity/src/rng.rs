//! Deterministic seed derivation and RNG construction.
//!
//! Every random quantity in the crate is drawn from a ChaCha12 stream whose
//! seed is derived from `(base_seed, domain, index)` by a fixed integer hash.
//! Experiment replicates, fBm components, oracle runs and theory checks all
//! live in disjoint domains, so
//!
//! * reruns with the same base seed are bitwise reproducible,
//! * results do not depend on thread count or scheduling (each replicate owns
//!   its stream, derived from its index, not from execution order),
//! * oracle randomness never overlaps experiment randomness.
//!
//! The derivation below is part of the output format: changing it changes
//! every seeded result, so it is frozen and covered by tests.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream domains. Values are arbitrary but fixed forever.
pub mod domains {
    /// Per-component fractional Gaussian noise streams.
    pub const FBM_COMPONENT: u64 = 0x01;
    /// Monte Carlo experiment replicates.
    pub const EXPERIMENT: u64 = 0x02;
    /// Long-run oracle construction (disjoint from experiments by design).
    pub const ORACLE: u64 = 0x03;
    /// Standalone numerical checks (decomposition gap, randomized ODE suite).
    pub const CHECKS: u64 = 0x04;
    /// Driving Brownian increments for singular-kernel quadratures.
    pub const BROWNIAN: u64 = 0x05;
}

/// SplitMix64 finalizer; full-period bijective mixer on `u64`.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the sub-seed for stream `index` of `domain` under `base`.
///
/// Distinct `(domain, index)` pairs map to distinct streams with
/// overwhelming probability; the map is stable across platforms.
pub fn derive_seed(base: u64, domain: u64, index: u64) -> u64 {
    let mut h = base ^ mix(domain.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1));
    h = mix(h);
    h ^= mix(index.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(0x8CB9_2BA7_2F3D_8DD7));
    mix(h)
}

/// ChaCha12 generator for stream `index` of `domain` under `base`.
pub fn stream(base: u64, domain: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, domain, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn derivation_is_frozen() {
        // Reference values pin the derivation; changing them breaks every
        // recorded manifest, so any diff here is a compatibility break.
        assert_eq!(derive_seed(0, domains::FBM_COMPONENT, 0), 0x0e08_e42d_4274_48ed);
        assert_eq!(derive_seed(42, domains::EXPERIMENT, 7), 0x19cc_d7ec_e0c3_b97a);
    }

    #[test]
    fn domains_and_indices_are_disjoint() {
        let mut seen = HashSet::new();
        for domain in [
            domains::FBM_COMPONENT,
            domains::EXPERIMENT,
            domains::ORACLE,
            domains::CHECKS,
            domains::BROWNIAN,
        ] {
            for index in 0..2_000 {
                assert!(seen.insert(derive_seed(12345, domain, index)));
            }
        }
    }

    #[test]
    fn streams_reproduce() {
        use rand::Rng;
        let a: Vec<u64> = stream(9, domains::ORACLE, 3).sample_iter(rand::distributions::Standard).take(8).collect();
        let b: Vec<u64> = stream(9, domains::ORACLE, 3).sample_iter(rand::distributions::Standard).take(8).collect();
        assert_eq!(a, b);
    }
}
