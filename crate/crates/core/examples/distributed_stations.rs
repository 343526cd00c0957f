//! Source, stations and coordinator as threads exchanging binary frames.
//!
//! Runs the two-chart layout (A at 0, B at Δ, C on sign η) over both
//! transports, checks the result against the single-process trial driver,
//! and audits the traffic.

use ghz_lhv::experiment::{run_trials, ScheduleSpec};
use ghz_lhv::stations::{run_distributed, DistributedOptions, Transport};
use ghz_lhv::Angle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = Angle::wrap(std::f64::consts::FRAC_PI_3);
    let settings = [Angle::ZERO, delta, Angle::wrap(1.234)];
    let (n, seed) = (100_000, 17);
    let reference = run_trials(&ScheduleSpec::fixed(delta, Angle::ZERO, Angle::ZERO), n, Angle::ZERO, seed)?;

    for transport in [Transport::Channels, Transport::Sockets] {
        let opts = DistributedOptions {
            audit: true,
            ..Default::default()
        };
        let run = run_distributed(settings, n, seed, transport, &opts)?;
        let same = run.outcomes.iter().zip(&reference).all(|(o, r)| *o == r.outcomes);
        let audit = run.traffic.as_ref().expect("audited").audit(settings);
        println!(
            "{transport:>8}: triple {:+.5} ± {:.5}, matches single-process run: {same}, audit passed: {} ({} frames)",
            run.report.triple, run.report.triple_stderr, audit.passed, audit.frames
        );
    }
    Ok(())
}
