//! Re-labelled coordinates under which C's outcome makes every product `+1`.

use std::f64::consts::PI;

use ghz_lhv::experiment::star_correlation_check;
use ghz_lhv::RelativeSetting;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, -2.0] {
        let c = star_correlation_check(RelativeSetting::radians(d), 100_000, 3)?;
        println!(
            "delta {d:+.4}: mean s_A s_B s_C* = {:+.6}, trials off +1: {}, A/B responses changed: {}",
            c.mean, c.violations, c.response_mismatches
        );
    }
    Ok(())
}
