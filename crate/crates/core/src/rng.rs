//! Seed derivation and the crate-wide random generator.
//!
//! Every stochastic object (natural frequencies, input assignment, graphs,
//! initial phases, task seeds) draws from its own ChaCha8 stream derived from
//! a master seed and a fixed purpose offset, so a single `master_seed`
//! reproduces a whole experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide seedable generator.
pub type Rng = ChaCha8Rng;

/// Fixed purpose offsets for deriving per-object streams.
pub mod stream {
    pub const FREQUENCIES: u64 = 0x01;
    pub const ASSIGNMENT: u64 = 0x02;
    pub const GRAPH: u64 = 0x03;
    pub const INITIAL_PHASES: u64 = 0x04;
    pub const TASK: u64 = 0x05;
    pub const SWEEP: u64 = 0x06;
    pub const BENCHMARK: u64 = 0x07;
    pub const ESN: u64 = 0x08;
}

/// splitmix64 finalizer; decorrelates nearby seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a purpose offset.
pub fn derive_seed(master: u64, offset: u64) -> u64 {
    mix(master ^ mix(offset))
}

/// Generator for the stream identified by `offset` under `master`.
pub fn stream_rng(master: u64, offset: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, offset))
}
