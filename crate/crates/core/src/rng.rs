//! Counter-based random streams.
//!
//! Every trial gets its own ChaCha stream keyed by `(seed, trial index)`, so
//! results never depend on how trials are split across threads. Hidden
//! configurations and setting choices use different keys: nothing that picks
//! a setting can shift the hidden-variable draws.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lhv::{sample_hidden, HiddenConfig};

// Domain separator for setting choices ("settings" in ASCII, truncated).
const SETTINGS_KEY: u64 = 0x7365_7474_696e_6773;

/// Stream for the hidden configuration of trial `index`.
pub fn hidden_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream for the setting choice of trial `index`.
pub fn settings_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SETTINGS_KEY);
    rng.set_stream(index);
    rng
}

/// The hidden configuration emitted in trial `index`.
pub fn draw_hidden(seed: u64, index: u64) -> HiddenConfig {
    let mut rng = hidden_stream(seed, index);
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    sample_hidden(u, v)
}
