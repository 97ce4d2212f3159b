//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` keyed by the run seed plus
//! a tag path, so streams are independent of evaluation order and a run can be
//! resumed from any epoch boundary.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to fold string tags into the seed.
fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Mixes a base seed with a tag and a list of integer coordinates.
pub fn derive_seed(seed: u64, tag: &str, coords: &[u64]) -> u64 {
    let mut h = splitmix(seed ^ hash_str(tag));
    for &c in coords {
        h = splitmix(h ^ c);
    }
    h
}

pub fn stream(seed: u64, tag: &str, coords: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, tag, coords))
}
