//! Does `L(·; δ₁+δ₂)` equal `L(L(·; δ₁); δ₂)`?
//!
//! If it did, A and B could each use their own setting as a chart offset and
//! still get `cos(δ₁+δ₂)`. This prints how far that is from true.

use std::f64::consts::PI;

use ghz_lhv::stations::composition_check;
use ghz_lhv::Angle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>7} {:>7} {:>9} {:>9} {:>9} {:>9}",
        "d1", "d2", "pointwise", "stations", "cos(sum)", "gap"
    );
    for (d1, d2) in [(0.0, 1.0), (1.0, 0.0), (PI / 3.0, PI / 4.0), (0.5, 0.3), (-1.0, 2.0), (PI / 2.0, PI / 2.0)] {
        let r = composition_check(Angle::wrap(d1), Angle::wrap(d2), 100_000, 0)?;
        println!(
            "{d1:>7.3} {d2:>7.3} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            r.pointwise_agreement, r.station_triple, r.reference_triple, r.correlator_gap
        );
    }
    Ok(())
}
