//! Draw hidden configurations and compare their histogram with the density.
//!
//! `ω` is sampled by inverting its marginal CDF, `η` is uniform. The
//! histogram of `ω` should follow `g(ω) = |sin ω| / 4` and the KS distance against
//! the exact CDF should shrink like `1/√N`.

use std::f64::consts::PI;

use ghz_lhv::lhv::{g, omega_cdf};
use ghz_lhv::rng::draw_hidden;
use ghz_lhv::stats::ks_one_sample;

fn main() {
    let n = 200_000u64;
    let seed = 1;
    let mut omegas: Vec<f64> = (0..n).map(|i| draw_hidden(seed, i).omega.value()).collect();

    const BINS: usize = 16;
    let mut counts = [0u64; BINS];
    for &w in &omegas {
        let b = (((w + PI) / (2.0 * PI)) * BINS as f64) as usize;
        counts[b.min(BINS - 1)] += 1;
    }
    let width = 2.0 * PI / BINS as f64;
    println!("{:>8} {:>10} {:>10}", "omega", "empirical", "density");
    for (k, &c) in counts.iter().enumerate() {
        let mid = -PI + (k as f64 + 0.5) * width;
        let expected = g(mid);
        println!("{mid:>8.3} {:>10.4} {expected:>10.4}", c as f64 / (n as f64 * width));
    }

    let d = ks_one_sample(&mut omegas, omega_cdf);
    println!("KS distance over {n} draws: {d:.5} (1/sqrt(N) = {:.5})", 1.0 / (n as f64).sqrt());
}
