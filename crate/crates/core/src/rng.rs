//! Per-trial random streams.
//!
//! Each trial gets its own ChaCha8 keystream, addressed by the master seed
//! (key), a stream id (nonce) and the trial index (block position). Any
//! trial can be generated without touching the others, so results do not
//! depend on how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Keystream words reserved for one trial.
const WORDS_PER_TRIAL: u128 = 1 << 24;

/// Stream ids used by the simulation engine.
pub mod streams {
    pub const AMPLITUDE: u64 = 0;
    pub const PHASE: u64 = 1;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(master_seed: u64) -> [u8; 32] {
    let mut state = master_seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Generator for trial `trial` of stream `stream` under `master_seed`.
pub fn trial_rng(master_seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(master_seed));
    rng.set_stream(stream);
    rng.set_word_pos(trial as u128 * WORDS_PER_TRIAL);
    rng
}
