use std::f64::consts::FRAC_PI_3;

use ghz_lhv::experiment::{run_trials, ScheduleSpec};
use ghz_lhv::stations::{
    run_distributed, station_respond, DistributedOptions, EmissionMessage, StationError, StationId, Transport,
};
use ghz_lhv::{Angle, Model, RelativeSetting};

#[test]
fn two_chart_layout_matches_the_trial_driver() {
    let seed = 123;
    let n = 10_000;
    for d in [0.0, 0.3, FRAC_PI_3, -1.7, 3.0] {
        let delta = Angle::wrap(d);
        let reference = run_trials(&ScheduleSpec::fixed(delta, Angle::ZERO, Angle::ZERO), n, Angle::ZERO, seed).unwrap();
        for transport in [Transport::Channels, Transport::Sockets] {
            let run =
                run_distributed([Angle::ZERO, delta, Angle::wrap(2.0)], n, seed, transport, &DistributedOptions::default())
                    .unwrap();
            assert_eq!(run.outcomes.len(), reference.len());
            for (o, r) in run.outcomes.iter().zip(&reference) {
                assert_eq!(*o, r.outcomes, "trial {} at delta {d} over {transport}", r.index);
            }
        }
    }
}

#[test]
fn zero_delta_over_sockets_is_exact() {
    let run = run_distributed([Angle::ZERO; 3], 10_000, 0, Transport::Sockets, &DistributedOptions::default()).unwrap();
    assert_eq!(run.report.triple, 1.0);
}

#[test]
fn transports_agree() {
    let settings = [Angle::ZERO, Angle::wrap(-0.8), Angle::ZERO];
    let a = run_distributed(settings, 5000, 4, Transport::Channels, &DistributedOptions::default()).unwrap();
    let b = run_distributed(settings, 5000, 4, Transport::Sockets, &DistributedOptions::default()).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.outcomes, b.outcomes);
}

#[test]
fn one_third_correlation_over_a_million_trials() {
    let delta = Angle::wrap(FRAC_PI_3);
    let run =
        run_distributed([Angle::ZERO, delta, Angle::ZERO], 1_000_000, 0, Transport::Channels, &DistributedOptions::default())
            .unwrap();
    assert!((run.report.triple - 0.5).abs() < 0.005, "{}", run.report.triple);
}

#[test]
fn respond_agrees_with_model_per_emission() {
    let delta = RelativeSetting::radians(1.3);
    for i in 0..100_000 {
        let e = EmissionMessage {
            index: i,
            hidden: ghz_lhv::rng::draw_hidden(8, i),
        };
        let want = Model::REFERENCE.outcomes(e.hidden, delta).unwrap();
        let a = station_respond(StationId::A, Angle::ZERO, &e).unwrap();
        let b = station_respond(StationId::B, delta.angle(), &e).unwrap();
        assert_eq!([a.outcome, b.outcome], [want[0], want[1]]);
        assert_eq!((a.index, b.station), (i, StationId::B));
    }
}

#[test]
fn zero_trials_is_an_error() {
    let err = run_distributed([Angle::ZERO; 3], 0, 0, Transport::Channels, &DistributedOptions::default()).unwrap_err();
    assert!(matches!(err, StationError::NoTrials));
}
