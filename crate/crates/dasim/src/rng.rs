//! Deterministic random-stream plumbing.
//!
//! Every stochastic stage owns a named ChaCha substream so that fibre
//! synthesis, laser phase noise and receiver noise are individually
//! reproducible: re-running one stage with the same seed replays exactly the
//! same draws no matter what the other stages consumed. Campaign workers
//! derive per-fibre seeds with a splitmix-style hash so work units stay
//! independent and order-free.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random substreams. Adding a stream never perturbs existing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Polarization parameter evolution along the fibre.
    FiberPolarization = 1,
    /// Rayleigh phasors (amplitude and phase) per segment.
    FiberScatter = 2,
    /// Laser phase-noise (Wiener) path.
    Laser = 3,
    /// Receiver additive noise.
    Receiver = 4,
    /// Anything ad hoc (tests, parameter sweeps).
    Aux = 5,
}

/// Build the ChaCha substream `stream` of a 64-bit seed.
pub fn substream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Derive a child seed from a parent seed and two indices (splitmix64 mix).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
