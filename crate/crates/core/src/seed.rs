//! Deterministic seed derivation.
//!
//! `derive_seed(master, label, index)` hashes the label with 64-bit FNV-1a and
//! then runs three rounds of the SplitMix64 finaliser:
//!
//! ```text
//! s = mix(master ^ mix(fnv1a(label)))
//! s = mix(s ^ mix(index + GOLDEN))
//! ```
//!
//! where `mix` is the SplitMix64 output function (a bijection on `u64`). The
//! result depends only on integer arithmetic, so it is identical on every
//! platform. Every random stream in the workspace is a [`ChaCha8Rng`] seeded
//! through [`rng_for`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

pub type SimRng = ChaCha8Rng;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn derive_seed(master: u64, stream_label: &str, index: u64) -> u64 {
    let s = mix(master ^ mix(fnv1a(stream_label.as_bytes())));
    mix(s ^ mix(index.wrapping_add(GOLDEN)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stream for item `index` of the stream `label`.
pub fn rng_for(master: u64, label: &str, index: u64) -> SimRng {
    rng_from_seed(derive_seed(master, label, index))
}
