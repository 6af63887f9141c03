//! Deterministic child random streams.
//!
//! Every random draw in the pipeline comes from a stream keyed by
//! `(master seed, drop, block, stage)`, so any cell of a sweep can be
//! regenerated in isolation and parallel execution matches serial execution.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::C64;

pub type StreamRng = ChaCha12Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stage {
    Topology = 1,
    Paths = 2,
    Channel = 3,
    UplinkNoise = 4,
    Validation = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream for one `(drop, block, stage)` cell.
pub fn child_stream(master: u64, drop: u64, block: u64, stage: Stage) -> StreamRng {
    let mut key = splitmix64(master);
    for part in [drop, block, stage as u64] {
        key = splitmix64(key ^ splitmix64(part.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    let mut seed = [0u8; 32];
    let mut state = key;
    for chunk in seed.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    StreamRng::from_seed(seed)
}

/// Circularly-symmetric complex Gaussian with variance `var`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}
