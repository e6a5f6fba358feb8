//! Seed derivation.
//!
//! Every random stream in the crate descends from one 64-bit root seed.
//! A child seed is `splitmix64(parent ^ splitmix64(label))`, where `label`
//! names the stream (a run index, a draw index, a fixed purpose tag), and
//! the child seeds a ChaCha8 generator. Streams with distinct labels are
//! independent for practical purposes, and the same root seed always
//! reproduces the same streams regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree(root)
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    pub fn child(self, label: u64) -> SeedTree {
        SeedTree(splitmix64(self.0 ^ splitmix64(label)))
    }

    /// Child keyed by a string tag (FNV-1a of the bytes).
    pub fn named(self, tag: &str) -> SeedTree {
        let h = tag
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3));
        self.child(h)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
