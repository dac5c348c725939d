//! Counter-based seed derivation.
//!
//! Every instance gets `derive_seed(master, instance_id)`; inside an instance,
//! graph sampling uses ChaCha stream [`GRAPH_STREAM`] and shot sampling uses
//! [`crate::estimators::SAMPLING_STREAM`], so no two consumers share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GRAPH_STREAM: u64 = 0;

/// One round of the splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, instance_id: u64) -> u64 {
    splitmix64(splitmix64(master) ^ instance_id.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
