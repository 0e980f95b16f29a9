//! Keyed Gaussian draws.
//!
//! Every draw is a pure function of `(seed, stream, counter)`: the ChaCha12
//! keystream for `seed` is addressed at stream `stream` and word position
//! `4·counter`, and two 64-bit words feed a Box–Muller transform. Draw order
//! therefore never matters, which lets paths run in any order and lets
//! coarsened paths reuse the fine draws.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

static DRAWS: AtomicU64 = AtomicU64::new(0);

thread_local! {
    static THREAD_DRAWS: Cell<u64> = const { Cell::new(0) };
}

/// Number of Gaussian draws made by this process so far.
pub fn draw_count() -> u64 {
    DRAWS.load(Ordering::Relaxed)
}

/// Number of Gaussian draws made on the calling thread so far; unaffected by
/// work running concurrently elsewhere.
pub fn thread_draw_count() -> u64 {
    THREAD_DRAWS.with(Cell::get)
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64) -> [u8; 32] {
    let mut s = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut s).to_le_bytes());
    }
    out
}

/// Standard normal variate keyed on `(seed, stream, counter)`.
pub fn gaussian(seed: u64, stream: u64, counter: u128) -> f64 {
    DRAWS.fetch_add(1, Ordering::Relaxed);
    THREAD_DRAWS.with(|c| c.set(c.get() + 1));
    let mut rng = ChaCha12Rng::from_seed(key(seed));
    rng.set_stream(stream);
    rng.set_word_pos(counter * 4);
    let a = rng.next_u64();
    let b = rng.next_u64();
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
