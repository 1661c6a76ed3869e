//! Seeding scheme for reproducible Monte-Carlo runs.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded through
//! [`SeedableRng::seed_from_u64`] with a 64-bit key derived by [`derive_seed`].
//! The derivation folds an ordered list of stream labels (trial index, cell
//! index, UE index, ...) into the master seed with the SplitMix64 finalizer, so
//! a stream depends only on its labels and never on scheduling order. This
//! is what lets parallel and serial runs produce identical bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all simulations.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and an ordered list of stream labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l.wrapping_add(GOLDEN))))
}

/// Opens the stream identified by `(seed, labels)`.
pub fn substream(seed: u64, labels: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, labels))
}

/// Stream labels used by the simulation pipeline. Kept in one place so two
/// stages never share a stream by accident.
pub mod label {
    pub const CHANNEL: u64 = 1;
    pub const DOWNLINK_NOISE: u64 = 2;
    pub const UPLINK_PHASES: u64 = 3;
    pub const UPLINK_NOISE: u64 = 4;
    pub const DSC: u64 = 5;
    pub const UE_POSITION: u64 = 6;
    pub const LS_PHASES: u64 = 7;
    pub const LS_NOISE: u64 = 8;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0
        // (state advanced by the golden gamma before mixing).
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_label_sensitive_and_repeatable() {
        let a: u64 = substream(7, &[1, 2]).random();
        let b: u64 = substream(7, &[1, 2]).random();
        let c: u64 = substream(7, &[2, 1]).random();
        let d: u64 = substream(8, &[1, 2]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
