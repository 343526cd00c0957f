//! Changing how settings are chosen never touches the hidden variables.
//!
//! Three schedules (fixed, alternating, per-trial random) share one seed.
//! Hidden configurations come from a stream keyed by the trial index alone,
//! so they agree bit for bit; the transformed `ω` stays on the same marginal.

use ghz_lhv::experiment::{freewill_audit, ScheduleMode, ScheduleSpec};
use ghz_lhv::Angle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let menu = vec![
        [Angle::ZERO; 3],
        [Angle::wrap(0.9), Angle::wrap(-0.2), Angle::ZERO],
        [Angle::wrap(2.5), Angle::wrap(1.0), Angle::wrap(-1.3)],
    ];
    let schedules = [
        ScheduleSpec::fixed(menu[1][0], menu[1][1], menu[1][2]),
        ScheduleSpec {
            mode: ScheduleMode::Alternating,
            settings: menu.clone(),
            seed: 0,
        },
        ScheduleSpec {
            mode: ScheduleMode::PerTrialRandom,
            settings: menu,
            seed: 99,
        },
    ];
    let r = freewill_audit(&schedules, 200_000, 4)?;
    println!("identical hidden streams: {}", r.identical_hidden_streams);
    for ks in &r.omega_ks {
        println!("schedule {} vs 0: KS {:.5}, p = {:.3}", ks.schedule, ks.distance, ks.p_value);
    }
    for (k, d) in r.transformed_ks.iter().enumerate() {
        println!("schedule {k}: KS of L(omega; delta_eff) against the marginal = {d:.5}");
    }
    Ok(())
}
