//! The chart map `L(ω; Δ)` from A's coordinate to B's, region by region.

use std::f64::consts::PI;

use ghz_lhv::lhv::{region_of, sign_s, transform_l};
use ghz_lhv::verify::{chart_tiling_defect, pushforward_deviation};
use ghz_lhv::{Angle, Model, RelativeSetting};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = RelativeSetting::radians(PI / 3.0);
    println!("delta = {:.4}", delta.value());
    println!("{:>8} {:>8} {:>6} {:>4} {:>4}", "omega", "L", "region", "S_A", "S_B");
    for k in 0..12 {
        let w = Angle::wrap(-PI + (k as f64 + 0.5) * PI / 6.0);
        let l = transform_l(w, delta)?;
        println!(
            "{:>8.4} {:>8.4} {:>6} {:>4} {:>4}",
            w.value(),
            l.value(),
            region_of(w, delta).as_str(),
            sign_s(w),
            sign_s(l)
        );
    }

    // L preserves the measure |sin ω| dω and its pieces tile the circle.
    for d in [-2.5, -0.7, 0.4, 1.9, 3.0] {
        let delta = RelativeSetting::radians(d);
        let dev = pushforward_deviation(&Model::REFERENCE, delta, 50_000)?;
        let gap = chart_tiling_defect(&Model::REFERENCE, delta)?;
        println!("delta {d:>5.2}: max |g(L)·|L'| - g| = {dev:.2e}, tiling defect = {gap:.2e}");
    }
    Ok(())
}
