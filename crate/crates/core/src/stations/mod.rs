//! A source, three stations and a coordinator that talk only through frames.
//!
//! Locality is a property of the plumbing rather than of the response code:
//! the operator sends each station its own setting and nothing else, the
//! source sends every station the same emission, and stations only ever
//! write outcomes to the coordinator. There is no link between stations.
//! [`audit_traffic`] checks a recorded run against these rules byte by byte.
//!
//! Every station reads the emission in the fiducial chart (the chart of
//! setting 0) and moves it into its own chart:
//!
//! * A: `ω_A = L(ω; δ_A)`;
//! * B: `ω_B = L(ω; δ_B)`, shifted by `π` when `η ≤ 0`;
//! * C: ignores its setting and answers `sign(η)`.
//!
//! With `δ_A = 0` and `δ_B = Δ_eff` this is the reference construction, so a
//! distributed run reproduces [`crate::experiment::run_trials`] trial by
//! trial. Whether other splits of the same total behave the same way depends
//! on how `L` composes; [`composition_check`] measures that.

pub mod audit;
pub mod transport;
pub mod wire;

use std::f64::consts::PI;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::experiment::{pm_one_stderr, CorrelatorReport, ExperimentError};
use crate::lhv::{omega_b_of, outcome_c, response, transform_l, HiddenConfig, LhvError, RelativeSetting};
use crate::rng::{draw_hidden, hidden_stream};

pub use audit::{audit_traffic, load_dump, TrafficAudit, TrafficEntry, TrafficLog};
pub use transport::{open_link, Endpoint, LinkId, Transport};
pub use wire::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum StationId {
    A = 0,
    B = 1,
    C = 2,
}

impl StationId {
    pub const ALL: [StationId; 3] = [StationId::A, StationId::B, StationId::C];

    pub fn from_u8(x: u8) -> Result<StationId, StationError> {
        match x {
            0 => Ok(StationId::A),
            1 => Ok(StationId::B),
            2 => Ok(StationId::C),
            other => Err(StationError::Malformed(format!("station id {other}"))),
        }
    }
}

/// What the source broadcasts: a trial index and the hidden configuration in
/// the fiducial chart. Nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionMessage {
    pub index: u64,
    pub hidden: HiddenConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationOutcome {
    pub index: u64,
    pub station: StationId,
    pub outcome: i8,
}

#[derive(Debug, thiserror::Error)]
pub enum StationError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("station {station:?} stopped after {after} outcomes (injected fault)")]
    Injected { station: StationId, after: u64 },
    /// A run that did not complete. `index` is the first trial without an
    /// outcome from every station; no partial results are returned.
    #[error("transport failure at trial {index}: {message}")]
    Transport { index: u64, message: String },
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Lhv(#[from] LhvError),
}

impl From<ExperimentError> for StationError {
    fn from(e: ExperimentError) -> Self {
        StationError::Protocol(e.to_string())
    }
}

/// One station's answer to one emission, using only its own setting.
pub fn station_respond(
    station: StationId,
    own_setting: Angle,
    emission: &EmissionMessage,
) -> Result<StationOutcome, StationError> {
    let HiddenConfig { omega, eta } = emission.hidden;
    let delta = RelativeSetting::new(own_setting);
    let outcome = match station {
        StationId::A => response(transform_l(omega, delta)?, eta),
        StationId::B => response(omega_b_of(omega, eta, delta)?, eta),
        StationId::C => outcome_c(eta),
    };
    Ok(StationOutcome {
        index: emission.index,
        station,
        outcome,
    })
}

/// How well `L(·; δ₁+δ₂)` agrees with `L(L(·; δ₁); δ₂)`, and what that does
/// to the triple correlator when A and B take `δ₁` and `δ₂` as their own
/// settings. A finding, not a pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub delta1: f64,
    pub delta2: f64,
    pub n_samples: u64,
    /// Fraction of sampled `ω` where the two sides agree within `1e-9`.
    pub pointwise_agreement: f64,
    pub max_pointwise_gap: f64,
    /// `⟨s_A s_B s_C⟩` with A at `δ₁` and B at `δ₂`.
    pub station_triple: f64,
    pub station_stderr: f64,
    /// `cos(δ₁ + δ₂)`, what the reference construction gives for that total.
    pub reference_triple: f64,
    pub correlator_gap: f64,
}

const COMPOSITION_TOL: f64 = 1e-9;

fn circular_gap(a: Angle, b: Angle) -> f64 {
    let d = (a.value() - b.value()).abs();
    d.min(2.0 * PI - d)
}

pub fn composition_check(delta1: Angle, delta2: Angle, n_samples: u64, seed: u64) -> Result<CompositionReport, StationError> {
    use rand::Rng;
    if n_samples == 0 {
        return Err(StationError::NoTrials);
    }
    let total = RelativeSetting::new(delta1 + delta2);
    let (d1, d2) = (RelativeSetting::new(delta1), RelativeSetting::new(delta2));
    let mut agree = 0u64;
    let mut max_gap = 0.0f64;
    let mut triple = 0i64;
    for i in 0..n_samples {
        // Pointwise: ω uniform on the circle, so gaps anywhere get counted.
        let u: f64 = hidden_stream(seed, i).random();
        let w = Angle::wrap(-PI + 2.0 * PI * u);
        let gap = circular_gap(transform_l(w, total)?, transform_l(transform_l(w, d1)?, d2)?);
        if gap <= COMPOSITION_TOL {
            agree += 1;
        }
        max_gap = max_gap.max(gap);

        let emission = EmissionMessage {
            index: i,
            hidden: draw_hidden(seed, i),
        };
        let a = station_respond(StationId::A, delta1, &emission)?.outcome;
        let b = station_respond(StationId::B, delta2, &emission)?.outcome;
        let c = station_respond(StationId::C, Angle::ZERO, &emission)?.outcome;
        triple += (a * b * c) as i64;
    }
    let n = n_samples as f64;
    let station_triple = triple as f64 / n;
    let reference_triple = total.value().cos();
    Ok(CompositionReport {
        delta1: delta1.value(),
        delta2: delta2.value(),
        n_samples,
        pointwise_agreement: agree as f64 / n,
        max_pointwise_gap: max_gap,
        station_triple,
        station_stderr: pm_one_stderr(station_triple, n_samples),
        reference_triple,
        correlator_gap: (station_triple - reference_triple).abs(),
    })
}

/// Makes one station fail partway through a run, to exercise the error path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultPlan {
    pub station: StationId,
    pub after: u64,
}

#[derive(Debug, Clone, Default)]
pub struct DistributedOptions {
    /// Audit every link as frames are sent.
    pub audit: bool,
    /// Also keep the raw frames (for dumping); implies `audit`.
    pub keep_frames: bool,
    pub fault: Option<FaultPlan>,
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub report: CorrelatorReport,
    /// `(s_A, s_B, s_C)` ordered by trial index.
    pub outcomes: Vec<[i8; 3]>,
    pub traffic: Option<TrafficLog>,
}

fn source_worker(mut links: Vec<transport::Tx>, n: u64, seed: u64) -> Result<(), StationError> {
    for index in 0..n {
        let frame = Frame::Emission(EmissionMessage {
            index,
            hidden: draw_hidden(seed, index),
        });
        for tx in &mut links {
            tx.send(&frame)?;
        }
    }
    for mut tx in links {
        tx.send(&Frame::End { count: n })?;
        tx.finish()?;
    }
    Ok(())
}

fn station_worker(
    id: StationId,
    mut setting_rx: transport::Rx,
    mut emission_rx: transport::Rx,
    mut out: transport::Tx,
    fault: Option<FaultPlan>,
) -> Result<(), StationError> {
    let mut setting = None;
    while let Some(frame) = setting_rx.recv()? {
        match frame {
            Frame::Setting { station, angle } if station == id && setting.is_none() => setting = Some(angle),
            other => return Err(StationError::Protocol(format!("station {id:?} got {other:?} on its setting link"))),
        }
    }
    let setting = setting.ok_or_else(|| StationError::Protocol(format!("station {id:?} never got a setting")))?;
    let mut answered = 0u64;
    loop {
        match emission_rx.recv()? {
            Some(Frame::Emission(e)) => {
                if let Some(f) = fault {
                    if f.station == id && answered == f.after {
                        return Err(StationError::Injected {
                            station: id,
                            after: answered,
                        });
                    }
                }
                out.send(&Frame::Outcome(station_respond(id, setting, &e)?))?;
                answered += 1;
            }
            Some(Frame::End { count }) => {
                out.send(&Frame::End { count })?;
                return out.finish();
            }
            Some(other) => return Err(StationError::Protocol(format!("station {id:?} got {other:?} from the source"))),
            None => return Err(StationError::Protocol(format!("emission stream to {id:?} ended early"))),
        }
    }
}

fn collector_worker(id: StationId, mut rx: transport::Rx, n: u64) -> (Vec<Option<i8>>, Option<StationError>) {
    let mut slots = vec![None; n as usize];
    let err = loop {
        match rx.recv() {
            Ok(Some(Frame::Outcome(o))) => {
                if o.station != id {
                    break Some(StationError::Protocol(format!("{:?} outcome on {id:?}'s link", o.station)));
                }
                match slots.get_mut(o.index as usize) {
                    Some(slot @ None) => *slot = Some(o.outcome),
                    Some(Some(_)) => break Some(StationError::Protocol(format!("duplicate outcome {} from {id:?}", o.index))),
                    None => break Some(StationError::Protocol(format!("trial {} out of range", o.index))),
                }
            }
            Ok(Some(Frame::End { .. })) => break None,
            Ok(Some(other)) => break Some(StationError::Protocol(format!("coordinator got {other:?} from {id:?}"))),
            Ok(None) => break Some(StationError::Protocol(format!("outcome stream from {id:?} ended early"))),
            Err(e) => break Some(e),
        }
    };
    (slots, err)
}

/// Runs `n_trials` through the source, three stations and the coordinator.
///
/// `settings[k]` goes only to station `k`. Outcomes are re-ordered by trial
/// index, so the report is the same for any transport or thread timing. If
/// any worker fails, the whole run is discarded and the error names the
/// first trial that lacks an outcome from every station.
pub fn run_distributed(
    settings: [Angle; 3],
    n_trials: u64,
    seed: u64,
    transport: Transport,
    options: &DistributedOptions,
) -> Result<DistributedRun, StationError> {
    if n_trials == 0 {
        return Err(StationError::NoTrials);
    }
    let log = (options.audit || options.keep_frames).then(|| TrafficLog::new(options.keep_frames));
    let link = |from, to| open_link(transport, LinkId { from, to }, log.as_ref());

    let mut emission_tx = Vec::new();
    let mut stations = Vec::new();
    let mut collectors = Vec::new();
    for id in StationId::ALL {
        let here = Endpoint::Station(id);
        let (mut op_tx, op_rx) = link(Endpoint::Operator, here)?;
        let (src_tx, src_rx) = link(Endpoint::Source, here)?;
        let (out_tx, out_rx) = link(here, Endpoint::Coordinator)?;
        op_tx.send(&Frame::Setting {
            station: id,
            angle: settings[id as usize],
        })?;
        op_tx.finish()?;
        emission_tx.push(src_tx);
        let fault = options.fault;
        stations.push(thread::spawn(move || station_worker(id, op_rx, src_rx, out_tx, fault)));
        collectors.push(thread::spawn(move || collector_worker(id, out_rx, n_trials)));
    }
    let source = thread::spawn(move || source_worker(emission_tx, n_trials, seed));

    let mut errors: Vec<String> = Vec::new();
    let mut note = |r: thread::Result<Result<(), StationError>>, who: &str| match r {
        Ok(Ok(())) => {}
        Ok(Err(e)) => errors.push(format!("{who}: {e}")),
        Err(_) => errors.push(format!("{who}: worker panicked")),
    };
    note(source.join(), "source");
    for (id, h) in StationId::ALL.iter().zip(stations) {
        note(h.join(), &format!("station {id:?}"));
    }
    let mut columns = Vec::new();
    for (id, h) in StationId::ALL.iter().zip(collectors) {
        match h.join() {
            Ok((slots, err)) => {
                if let Some(e) = err {
                    errors.push(format!("coordinator <- {id:?}: {e}"));
                }
                columns.push(slots);
            }
            Err(_) => {
                errors.push(format!("coordinator <- {id:?}: worker panicked"));
                columns.push(vec![None; n_trials as usize]);
            }
        }
    }

    // Keep the complete prefix; a trial missing any station's outcome ends it.
    let outcomes: Vec<[i8; 3]> = columns[0]
        .iter()
        .zip(&columns[1])
        .zip(&columns[2])
        .map_while(|((a, b), c)| Some([(*a)?, (*b)?, (*c)?]))
        .collect();
    if !errors.is_empty() || outcomes.len() as u64 != n_trials {
        if errors.is_empty() {
            errors.push("missing outcomes".into());
        }
        return Err(StationError::Transport {
            index: outcomes.len() as u64,
            message: errors.join("; "),
        });
    }
    Ok(DistributedRun {
        report: CorrelatorReport::from_outcomes(outcomes.iter().copied())?,
        outcomes,
        traffic: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::Model;
    use std::f64::consts::FRAC_PI_3;

    fn emission(i: u64) -> EmissionMessage {
        EmissionMessage {
            index: i,
            hidden: draw_hidden(11, i),
        }
    }

    #[test]
    fn zero_setting_is_the_fiducial_chart() {
        for i in 0..1000 {
            let e = emission(i);
            let a = station_respond(StationId::A, Angle::ZERO, &e).unwrap();
            assert_eq!(a.outcome, response(e.hidden.omega, e.hidden.eta));
        }
    }

    #[test]
    fn station_c_ignores_its_setting() {
        for i in 0..1000 {
            let e = emission(i);
            for g in [-3.0, -1.0, 0.0, 2.5] {
                let c = station_respond(StationId::C, Angle::wrap(g), &e).unwrap();
                assert_eq!(c.outcome, outcome_c(e.hidden.eta));
            }
        }
    }

    #[test]
    fn two_chart_stations_match_the_model() {
        for d in [-2.0, -0.3, 0.0, 0.7, FRAC_PI_3, 3.0] {
            let delta = Angle::wrap(d);
            for i in 0..100_000 {
                let e = emission(i);
                let want = Model::REFERENCE.outcomes(e.hidden, RelativeSetting::new(delta)).unwrap();
                let got = [
                    station_respond(StationId::A, Angle::ZERO, &e).unwrap().outcome,
                    station_respond(StationId::B, delta, &e).unwrap().outcome,
                    station_respond(StationId::C, Angle::wrap(1.0), &e).unwrap().outcome,
                ];
                assert_eq!(got, want, "trial {i}, delta {d}");
            }
        }
    }

    #[test]
    fn composition_is_trivial_with_a_zero_step() {
        for (d1, d2) in [(0.9, 0.0), (0.0, -1.4)] {
            let r = composition_check(Angle::wrap(d1), Angle::wrap(d2), 20_000, 3).unwrap();
            assert_eq!(r.pointwise_agreement, 1.0, "{r:?}");
        }
    }

    #[test]
    fn composition_reports_nontrivial_split() {
        let r = composition_check(Angle::wrap(FRAC_PI_3), Angle::wrap(PI / 4.0), 20_000, 3).unwrap();
        assert!((0.0..=1.0).contains(&r.pointwise_agreement));
        assert!(r.correlator_gap.is_finite());
        assert_eq!(r.n_samples, 20_000);
    }

    #[test]
    fn distributed_run_audits_clean() {
        let settings = [Angle::ZERO, Angle::wrap(0.4), Angle::wrap(-2.0)];
        let run = run_distributed(
            settings,
            500,
            9,
            Transport::Channels,
            &DistributedOptions {
                audit: true,
                ..Default::default()
            },
        )
        .unwrap();
        let audit = run.traffic.unwrap().audit(settings);
        assert!(audit.passed, "{:?}", audit.violations);
        assert_eq!(audit.emissions_per_station, [500; 3]);
    }

    #[test]
    fn audit_catches_cross_station_setting() {
        let settings = [Angle::ZERO, Angle::wrap(0.4), Angle::ZERO];
        let mut entries = run_distributed(
            settings,
            10,
            0,
            Transport::Channels,
            &DistributedOptions {
                keep_frames: true,
                ..Default::default()
            },
        )
        .unwrap()
        .traffic
        .unwrap()
        .entries();
        assert!(audit_traffic(&entries, settings).passed);
        entries.push(TrafficEntry {
            link: LinkId {
                from: Endpoint::Operator,
                to: Endpoint::Station(StationId::A),
            },
            bytes: Frame::Setting {
                station: StationId::B,
                angle: settings[1],
            }
            .encode(),
        });
        entries.push(TrafficEntry {
            link: LinkId {
                from: Endpoint::Station(StationId::A),
                to: Endpoint::Station(StationId::B),
            },
            bytes: Frame::End { count: 0 }.encode(),
        });
        let audit = audit_traffic(&entries, settings);
        assert!(!audit.passed);
        assert!(audit.violations.iter().any(|v| v.contains("setting sent to A")));
        assert!(audit.violations.iter().any(|v| v.contains("forbidden link")));
    }

    #[test]
    fn injected_fault_discards_the_run() {
        for t in [Transport::Channels, Transport::Sockets] {
            let err = run_distributed(
                [Angle::ZERO; 3],
                2000,
                1,
                t,
                &DistributedOptions {
                    fault: Some(FaultPlan {
                        station: StationId::B,
                        after: 700,
                    }),
                    ..Default::default()
                },
            )
            .unwrap_err();
            match err {
                StationError::Transport { index, message } => {
                    assert_eq!(index, 700, "{message}");
                    assert!(message.contains("injected"), "{message}");
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }
}
