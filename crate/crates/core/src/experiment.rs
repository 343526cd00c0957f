//! Trial generation, exact quadrature over the torus, and the reports built
//! from them.
//!
//! The three per-station settings enter the model only through
//! `Δ_eff = α + β + γ + Φ` (wrapped). Trials are generated in parallel from
//! per-index random streams, so a run is a pure function of
//! `(schedule, n_trials, phi, seed)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::Angle;
use crate::lhv::{
    density, omega_cdf, outcome_c, region_of, response, star_remap, weak_identity_products,
    HiddenConfig, LhvError, Model, RegionTag, RelativeSetting,
};
use crate::oracle::{self, ObservableSpec, OracleError};
use crate::quadrature::{breakpoints, GaussLegendre};
use crate::rng::{draw_hidden, settings_stream};
use crate::stats;

/// Nodes per smooth segment of the composite rule.
pub const QUAD_NODES: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("schedule has no settings")]
    EmptySchedule,
    #[error("fixed schedule needs exactly one setting, got {0}")]
    FixedNeedsOne(usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error("no records to estimate from")]
    EmptyRecords,
    #[error("free-will audit needs at least two schedules, got {0}")]
    TooFewSchedules(usize),
    #[error(transparent)]
    Lhv(#[from] LhvError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Per-station in-plane settings plus the state phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingTriple {
    pub alpha: Angle,
    pub beta: Angle,
    pub gamma: Angle,
    pub phi: Angle,
}

impl SettingTriple {
    pub fn new(alpha: Angle, beta: Angle, gamma: Angle, phi: Angle) -> Self {
        SettingTriple { alpha, beta, gamma, phi }
    }

    pub fn effective_delta(&self) -> RelativeSetting {
        RelativeSetting::radians(
            self.alpha.value() + self.beta.value() + self.gamma.value() + self.phi.value(),
        )
    }

    pub fn angles(&self) -> [Angle; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

/// One emitted triple and what the three stations recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub hidden: HiddenConfig,
    pub settings: SettingTriple,
    pub outcomes: [i8; 3],
    pub region: RegionTag,
}

impl TrialRecord {
    pub fn product(&self) -> i8 {
        self.outcomes[0] * self.outcomes[1] * self.outcomes[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    Fixed,
    PerTrialRandom,
    Alternating,
}

/// How settings are assigned to trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub mode: ScheduleMode,
    pub settings: Vec<[Angle; 3]>,
    /// Key for per-trial random setting choices; unused by other modes.
    pub seed: u64,
}

impl ScheduleSpec {
    pub fn fixed(alpha: Angle, beta: Angle, gamma: Angle) -> Self {
        ScheduleSpec {
            mode: ScheduleMode::Fixed,
            settings: vec![[alpha, beta, gamma]],
            seed: 0,
        }
    }

    /// Fixed schedule whose settings sum to `delta`.
    pub fn fixed_delta(delta: f64) -> Self {
        ScheduleSpec::fixed(Angle::wrap(delta), Angle::ZERO, Angle::ZERO)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.settings.is_empty() {
            return Err(ExperimentError::EmptySchedule);
        }
        if self.mode == ScheduleMode::Fixed && self.settings.len() != 1 {
            return Err(ExperimentError::FixedNeedsOne(self.settings.len()));
        }
        Ok(())
    }

    /// Settings used in trial `index`.
    pub fn setting_for(&self, index: u64, phi: Angle) -> SettingTriple {
        let k = match self.mode {
            ScheduleMode::Fixed => 0,
            ScheduleMode::Alternating => (index % self.settings.len() as u64) as usize,
            ScheduleMode::PerTrialRandom => {
                settings_stream(self.seed, index).random_range(0..self.settings.len())
            }
        };
        let [a, b, c] = self.settings[k];
        SettingTriple::new(a, b, c, phi)
    }
}

/// Runs one trial of `model`.
pub fn trial(
    model: &Model,
    seed: u64,
    index: u64,
    settings: SettingTriple,
) -> Result<TrialRecord, LhvError> {
    let hidden = draw_hidden(seed, index);
    let delta = settings.effective_delta();
    let outcomes = model.outcomes(hidden, delta)?;
    Ok(TrialRecord {
        index,
        hidden,
        settings,
        outcomes,
        region: region_of(hidden.omega, delta),
    })
}

/// Generates `n_trials` records with the reference model.
pub fn run_trials(
    schedule: &ScheduleSpec,
    n_trials: u64,
    phi: Angle,
    seed: u64,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    run_trials_with(&Model::REFERENCE, schedule, n_trials, phi, seed)
}

pub fn run_trials_with(
    model: &Model,
    schedule: &ScheduleSpec,
    n_trials: u64,
    phi: Angle,
    seed: u64,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    schedule.validate()?;
    if n_trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    let records: Result<Vec<_>, LhvError> = (0..n_trials)
        .into_par_iter()
        .map(|i| trial(model, seed, i, schedule.setting_for(i, phi)))
        .collect();
    Ok(records?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
}

/// Single, pair and triple correlators of the three outcome streams.
///
/// Pairs are ordered `(AB, BC, CA)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorReport {
    pub singles: [f64; 3],
    pub pairs: [f64; 3],
    pub triple: f64,
    pub singles_stderr: [f64; 3],
    pub pairs_stderr: [f64; 3],
    pub triple_stderr: f64,
    pub n_trials: u64,
    pub method: Method,
}

impl CorrelatorReport {
    /// Estimates from outcome triples. Sums are kept as integers, so the
    /// result does not depend on the order outcomes arrive in.
    pub fn from_outcomes<I>(outcomes: I) -> Result<Self, ExperimentError>
    where
        I: IntoIterator<Item = [i8; 3]>,
    {
        let mut n: i64 = 0;
        let mut s = [0i64; 3];
        let mut p = [0i64; 3];
        let mut t: i64 = 0;
        for [a, b, c] in outcomes {
            let (a, b, c) = (a as i64, b as i64, c as i64);
            n += 1;
            s[0] += a;
            s[1] += b;
            s[2] += c;
            p[0] += a * b;
            p[1] += b * c;
            p[2] += c * a;
            t += a * b * c;
        }
        if n == 0 {
            return Err(ExperimentError::EmptyRecords);
        }
        let mean = |x: i64| x as f64 / n as f64;
        let se = |x: i64| pm_one_stderr(mean(x), n as u64);
        Ok(CorrelatorReport {
            singles: s.map(mean),
            pairs: p.map(mean),
            triple: mean(t),
            singles_stderr: s.map(se),
            pairs_stderr: p.map(se),
            triple_stderr: se(t),
            n_trials: n as u64,
            method: Method::MonteCarlo,
        })
    }
}

/// Standard error of the mean of `n` values in `{-1, +1}` with mean `m`.
pub fn pm_one_stderr(m: f64, n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    let var = ((1.0 - m * m) * n / (n - 1.0)).max(0.0);
    (var / n).sqrt()
}

pub fn estimate_correlators(records: &[TrialRecord]) -> Result<CorrelatorReport, ExperimentError> {
    CorrelatorReport::from_outcomes(records.iter().map(|r| r.outcomes))
}

/// Integral over the torus of `density · f`, split at every point where the
/// model's outcomes can change: `ω ∈ {0, Δ, Δ ± π}` and `η = 0`.
pub fn torus_integral<F>(delta: RelativeSetting, mut f: F) -> f64
where
    F: FnMut(HiddenConfig) -> f64,
{
    torus_integral_over(delta, (-PI, PI), &mut f)
}

fn torus_integral_over<F>(delta: RelativeSetting, eta_range: (f64, f64), f: &mut F) -> f64
where
    F: FnMut(HiddenConfig) -> f64,
{
    let rule = GaussLegendre::new(QUAD_NODES);
    let d = delta.value();
    let omega_breaks = breakpoints(-PI, PI, &[0.0, d, d - PI, d + PI]);
    let eta_breaks = breakpoints(eta_range.0, eta_range.1, &[0.0]);
    let mut parts = Vec::new();
    for w in omega_breaks.windows(2) {
        for e in eta_breaks.windows(2) {
            let mut acc = Vec::with_capacity(QUAD_NODES * QUAD_NODES);
            for (omega, wo) in rule.mapped(w[0], w[1]) {
                for (eta, we) in rule.mapped(e[0], e[1]) {
                    let h = HiddenConfig::new(Angle::wrap(omega), Angle::wrap(eta));
                    acc.push(wo * we * density(h) * f(h));
                }
            }
            parts.push(stats::compensated_sum(acc));
        }
    }
    stats::compensated_sum(parts)
}

/// `⟨s_A s_B s_C⟩` by quadrature, evaluating the model's response functions
/// at every node.
pub fn quadrature_triple_correlation(delta: RelativeSetting) -> Result<f64, LhvError> {
    quadrature_triple_with(&Model::REFERENCE, delta)
}

pub fn quadrature_triple_with(model: &Model, delta: RelativeSetting) -> Result<f64, LhvError> {
    let mut err = None;
    let v = torus_integral(delta, |h| match model.outcomes(h, delta) {
        Ok([a, b, c]) => (a * b * c) as f64,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    err.map_or(Ok(v), Err)
}

/// Full correlator report by quadrature (zero standard errors).
pub fn quadrature_report(model: &Model, delta: RelativeSetting) -> Result<CorrelatorReport, LhvError> {
    let mut err = None;
    let mut outs = |h: HiddenConfig| match model.outcomes(h, delta) {
        Ok(o) => o.map(f64::from),
        Err(e) => {
            err.get_or_insert(e);
            [0.0; 3]
        }
    };
    let mut pick = |k: usize| torus_integral(delta, |h| {
        let o = outs(h);
        match k {
            0..=2 => o[k],
            3 => o[0] * o[1],
            4 => o[1] * o[2],
            5 => o[2] * o[0],
            _ => o[0] * o[1] * o[2],
        }
    });
    let v: Vec<f64> = (0..7).map(&mut pick).collect();
    if let Some(e) = err {
        return Err(e);
    }
    Ok(CorrelatorReport {
        singles: [v[0], v[1], v[2]],
        pairs: [v[3], v[4], v[5]],
        triple: v[6],
        singles_stderr: [0.0; 3],
        pairs_stderr: [0.0; 3],
        triple_stderr: 0.0,
        n_trials: 0,
        method: Method::Quadrature,
    })
}

/// A/B correlator on each half of the `η` circle and over the whole torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPairs {
    pub eta_positive: f64,
    pub eta_non_positive: f64,
    pub whole: f64,
}

pub fn conditional_pair_correlations(delta: RelativeSetting) -> Result<ConditionalPairs, LhvError> {
    conditional_pairs_with(&Model::REFERENCE, delta)
}

pub fn conditional_pairs_with(model: &Model, delta: RelativeSetting) -> Result<ConditionalPairs, LhvError> {
    let mut err = None;
    let mut ab = |h: HiddenConfig| match model.outcomes(h, delta) {
        Ok([a, b, _]) => (a * b) as f64,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    // each half carries probability 1/2
    let pos = 2.0 * torus_integral_over(delta, (0.0, PI), &mut ab);
    let neg = 2.0 * torus_integral_over(delta, (-PI, 0.0), &mut ab);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(ConditionalPairs {
        eta_positive: pos,
        eta_non_positive: neg,
        whole: 0.5 * (pos + neg),
    })
}

/// Probability mass of each partition cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionMeasures {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl PartitionMeasures {
    /// `μ(PP ∪ MM) − μ(PM ∪ MP)`.
    pub fn difference(&self) -> f64 {
        (self.pp + self.mm) - (self.pm + self.mp)
    }

    pub fn total(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }
}

pub fn partition_measures(delta: RelativeSetting) -> PartitionMeasures {
    let mass = |tag: RegionTag| {
        torus_integral(delta, |h| if region_of(h.omega, delta) == tag { 1.0 } else { 0.0 })
    };
    PartitionMeasures {
        pp: mass(RegionTag::PP),
        pm: mass(RegionTag::PM),
        mp: mass(RegionTag::MP),
        mm: mass(RegionTag::MM),
    }
}

/// Outcome of the starred re-labelling check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarCheck {
    pub delta: f64,
    pub n_trials: u64,
    /// Mean of `s_A s_B s_C*`.
    pub mean: f64,
    /// Trials whose product was not `+1`.
    pub violations: u64,
    /// Trials where A's or B's response changed under the re-labelling.
    pub response_mismatches: u64,
}

/// Re-labels every trial and scores C by the sign of `η*`.
pub fn star_correlation_check(
    delta: RelativeSetting,
    n_trials: u64,
    seed: u64,
) -> Result<StarCheck, ExperimentError> {
    star_check_with(&Model::REFERENCE, delta, n_trials, seed)
}

pub fn star_check_with(
    model: &Model,
    delta: RelativeSetting,
    n_trials: u64,
    seed: u64,
) -> Result<StarCheck, ExperimentError> {
    if n_trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    let per_trial: Result<Vec<(i8, bool)>, LhvError> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let h = draw_hidden(seed, i);
            let omega_b = model.omega_b(h.omega, h.eta, delta)?;
            let s_a = response(h.omega, h.eta);
            let s_b = response(omega_b, h.eta);
            let star = star_remap(h, omega_b, delta, region_of(h.omega, delta))?;
            let s_c = outcome_c(star.eta);
            let same = response(star.omega_a, star.eta) == s_a && response(star.omega_b, star.eta) == s_b;
            Ok((s_a * s_b * s_c, same))
        })
        .collect();
    let per_trial = per_trial?;
    let sum: i64 = per_trial.iter().map(|(p, _)| *p as i64).sum();
    Ok(StarCheck {
        delta: delta.value(),
        n_trials,
        mean: sum as f64 / n_trials as f64,
        violations: per_trial.iter().filter(|(p, _)| *p != 1).count() as u64,
        response_mismatches: per_trial.iter().filter(|(_, s)| !s).count() as u64,
    })
}

/// One line of the paradox table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxRow {
    pub label: String,
    pub settings: SettingTriple,
    pub delta_eff: f64,
    /// Mean of `s_A s_B s_C` over the run.
    pub product_mean: f64,
    pub stderr: f64,
    /// The common value when every trial had the same product.
    pub constant_product: Option<i8>,
    pub oracle: f64,
    pub n_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxReport {
    pub phi: f64,
    pub rows: Vec<ParadoxRow>,
    pub mermin_model: f64,
    pub mermin_oracle: f64,
    /// Bound obeyed by models that assign fixed ±1 values to X and Y at once.
    pub classical_bound: f64,
    /// `[XXX, XYY, YXY, YYX]` real parts with `Y = i·X` bookkeeping.
    pub weak_products: [f64; 4],
    pub narrative: String,
}

pub const PARADOX_NARRATIVE: &str = "\
If every particle carried fixed values s_X, s_Y in {+1, -1} for both axes at once, \
multiplying the XYY, YXY and YYX products would give s_X^A s_X^B s_X^C (s_Y^A s_Y^B s_Y^C)^2 \
= s_X^A s_X^B s_X^C = (-1)^3 = -1, contradicting XXX = +1. \
Here each setting triple is read in its own chart through delta_eff = alpha+beta+gamma+phi, \
so the four rows never share one assignment of values; the only binary value a particle \
carries is the one along the axis its own station measures. \
Treating the unmeasured Y component as i*s_X reproduces the four signs (+1, -1, -1, -1) \
without contradiction, since i^2 = -1 supplies the minus signs.";

/// Runs the four GHZ setting triples.
pub fn ghz_paradox_report(phi: Angle, n_trials: u64, seed: u64) -> Result<ParadoxReport, ExperimentError> {
    let x = Angle::ZERO;
    let y = Angle::wrap(FRAC_PI_2);
    let cases = [("XXX", [x, x, x]), ("XYY", [x, y, y]), ("YXY", [y, x, y]), ("YYX", [y, y, x])];
    let mut rows = Vec::with_capacity(4);
    for (label, [a, b, c]) in cases {
        let schedule = ScheduleSpec::fixed(a, b, c);
        let records = run_trials(&schedule, n_trials, phi, seed)?;
        let report = estimate_correlators(&records)?;
        let first = records[0].product();
        let constant = records.iter().all(|r| r.product() == first).then_some(first);
        let settings = SettingTriple::new(a, b, c, phi);
        rows.push(ParadoxRow {
            label: label.to_string(),
            settings,
            delta_eff: settings.effective_delta().value(),
            product_mean: report.triple,
            stderr: report.triple_stderr,
            constant_product: constant,
            oracle: oracle::ghz_triple(a, b, c, phi)?,
            n_trials,
        });
    }
    let mermin = |v: Vec<f64>| v[0] - v[1] - v[2] - v[3];
    let weak = weak_identity_products([1, 1, 1]).map(|z| z.re);
    Ok(ParadoxReport {
        phi: phi.value(),
        mermin_model: mermin(rows.iter().map(|r| r.product_mean).collect()),
        mermin_oracle: mermin(rows.iter().map(|r| r.oracle).collect()),
        rows,
        classical_bound: 2.0,
        weak_products: weak,
        narrative: PARADOX_NARRATIVE.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_eff: f64,
    pub model: f64,
    pub oracle: f64,
    pub discrepancy: f64,
}

/// Empirical model outcome table against the Born-rule table at one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointComparison {
    pub settings: SettingTriple,
    /// Outcome tuples in the order of [`oracle::outcome_tuples`].
    pub outcomes: Vec<[i8; 3]>,
    pub model: Vec<f64>,
    pub oracle: Vec<f64>,
    pub total_variation: f64,
    pub n_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub phi: f64,
    pub rows: Vec<ComparisonRow>,
    pub max_discrepancy: f64,
    pub joint: Option<JointComparison>,
}

/// Settings at which the joint outcome tables are compared.
#[derive(Debug, Clone, Copy)]
pub struct JointProbe {
    pub angles: [Angle; 3],
    pub n_trials: u64,
    pub seed: u64,
}

/// Model triple correlator (by quadrature) against the state-vector value at
/// every grid point.
pub fn compare_with_oracle(
    grid: &[[Angle; 3]],
    phi: Angle,
    joint: Option<JointProbe>,
) -> Result<ComparisonTable, ExperimentError> {
    let rows: Result<Vec<ComparisonRow>, ExperimentError> = grid
        .par_iter()
        .map(|&[a, b, c]| {
            let settings = SettingTriple::new(a, b, c, phi);
            let delta = settings.effective_delta();
            let model = quadrature_triple_correlation(delta)?;
            let oracle = oracle::ghz_triple(a, b, c, phi)?;
            Ok(ComparisonRow {
                alpha: a.value(),
                beta: b.value(),
                gamma: c.value(),
                delta_eff: delta.value(),
                model,
                oracle,
                discrepancy: (model - oracle).abs(),
            })
        })
        .collect();
    let rows = rows?;
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let joint = match joint {
        Some(probe) => Some(joint_comparison(probe, phi)?),
        None => None,
    };
    Ok(ComparisonTable {
        phi: phi.value(),
        rows,
        max_discrepancy,
        joint,
    })
}

fn joint_comparison(probe: JointProbe, phi: Angle) -> Result<JointComparison, ExperimentError> {
    let [a, b, c] = probe.angles;
    let records = run_trials(&ScheduleSpec::fixed(a, b, c), probe.n_trials, phi, probe.seed)?;
    let tuples = oracle::outcome_tuples(3);
    let mut counts = vec![0u64; tuples.len()];
    for r in &records {
        let k = r
            .outcomes
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | usize::from(s == -1));
        counts[k] += 1;
    }
    let n = records.len() as f64;
    let model: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let state = oracle::ghz_state(3, phi)?;
    let born = oracle::joint_distribution(&state, &ObservableSpec::xy(&[a, b, c]))?.as_vec(3);
    Ok(JointComparison {
        settings: SettingTriple::new(a, b, c, phi),
        outcomes: tuples.iter().map(|t| [t[0], t[1], t[2]]).collect(),
        total_variation: stats::total_variation(&model, &born),
        model,
        oracle: born,
        n_trials: probe.n_trials,
    })
}

/// `n` evenly spaced angles starting at `-π`.
pub fn uniform_grid(n: usize) -> Vec<Angle> {
    (0..n)
        .map(|k| Angle::wrap(-PI + 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Cartesian cube of [`uniform_grid`].
pub fn cube_grid(n: usize) -> Vec<[Angle; 3]> {
    let g = uniform_grid(n);
    let mut out = Vec::with_capacity(n * n * n);
    for &a in &g {
        for &b in &g {
            for &c in &g {
                out.push([a, b, c]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleKs {
    pub schedule: usize,
    pub distance: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreewillReport {
    pub n_trials: u64,
    pub seed: u64,
    /// Hidden configurations agree bit for bit across all schedules.
    pub identical_hidden_streams: bool,
    /// Two-sample KS of each schedule's `ω` against schedule 0.
    pub omega_ks: Vec<ScheduleKs>,
    /// KS distance of `L(ω; Δ_eff)` against the `ω` marginal, per schedule.
    pub transformed_ks: Vec<f64>,
}

pub fn freewill_audit(
    schedules: &[ScheduleSpec],
    n_trials: u64,
    seed: u64,
) -> Result<FreewillReport, ExperimentError> {
    if schedules.len() < 2 {
        return Err(ExperimentError::TooFewSchedules(schedules.len()));
    }
    let runs: Vec<Vec<TrialRecord>> = schedules
        .iter()
        .map(|s| run_trials(s, n_trials, Angle::ZERO, seed))
        .collect::<Result<_, _>>()?;
    let bits = |r: &TrialRecord| (r.hidden.omega.value().to_bits(), r.hidden.eta.value().to_bits());
    let identical = runs[1..]
        .iter()
        .all(|run| run.iter().zip(&runs[0]).all(|(a, b)| bits(a) == bits(b)));
    let omegas = |run: &[TrialRecord]| run.iter().map(|r| r.hidden.omega.value()).collect::<Vec<_>>();
    let mut base = omegas(&runs[0]);
    let mut omega_ks = Vec::new();
    for (k, run) in runs.iter().enumerate().skip(1) {
        let mut other = omegas(run);
        let d = stats::ks_two_sample(&mut base, &mut other);
        omega_ks.push(ScheduleKs {
            schedule: k,
            distance: d,
            p_value: stats::ks_two_sample_p(d, base.len(), other.len()),
        });
    }
    let mut transformed_ks = Vec::new();
    for run in &runs {
        let mut moved = run
            .iter()
            .map(|r| {
                Model::REFERENCE
                    .transform(r.hidden.omega, r.settings.effective_delta())
                    .map(Angle::value)
            })
            .collect::<Result<Vec<_>, _>>()?;
        transformed_ks.push(stats::ks_one_sample(&mut moved, omega_cdf));
    }
    Ok(FreewillReport {
        n_trials,
        seed,
        identical_hidden_streams: identical,
        omega_ks,
        transformed_ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3};

    fn rs(x: f64) -> RelativeSetting {
        RelativeSetting::radians(x)
    }

    #[test]
    fn schedule_validation() {
        let empty = ScheduleSpec {
            mode: ScheduleMode::Alternating,
            settings: vec![],
            seed: 0,
        };
        assert_eq!(run_trials(&empty, 1, Angle::ZERO, 0), Err(ExperimentError::EmptySchedule));
        let two = ScheduleSpec {
            mode: ScheduleMode::Fixed,
            settings: vec![[Angle::ZERO; 3]; 2],
            seed: 0,
        };
        assert_eq!(two.validate(), Err(ExperimentError::FixedNeedsOne(2)));
        assert_eq!(
            run_trials(&ScheduleSpec::fixed_delta(0.0), 0, Angle::ZERO, 0),
            Err(ExperimentError::NoTrials)
        );
    }

    #[test]
    fn alternating_cycles() {
        let s = ScheduleSpec {
            mode: ScheduleMode::Alternating,
            settings: vec![[Angle::ZERO; 3], [Angle::wrap(1.0), Angle::ZERO, Angle::ZERO]],
            seed: 0,
        };
        assert_eq!(s.setting_for(0, Angle::ZERO).alpha.value(), 0.0);
        assert_eq!(s.setting_for(1, Angle::ZERO).alpha.value(), 1.0);
        assert_eq!(s.setting_for(2, Angle::ZERO).alpha.value(), 0.0);
    }

    #[test]
    fn constant_records_have_zero_stderr() {
        let r = CorrelatorReport::from_outcomes(std::iter::repeat([1, 1, 1]).take(50)).unwrap();
        assert_eq!(r.triple, 1.0);
        assert_eq!(r.triple_stderr, 0.0);
        assert_eq!(r.singles, [1.0; 3]);
        assert_eq!(
            CorrelatorReport::from_outcomes(std::iter::empty()),
            Err(ExperimentError::EmptyRecords)
        );
    }

    #[test]
    fn stderr_formula() {
        // four values +1,+1,-1,-1: mean 0, sample variance 4/3
        let se = pm_one_stderr(0.0, 4);
        assert!((se - (4.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quadrature_law_spot_values() {
        assert!((quadrature_triple_correlation(rs(0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(quadrature_triple_correlation(rs(FRAC_PI_2)).unwrap().abs() < 1e-9);
        let v = quadrature_triple_correlation(rs(2.0)).unwrap();
        assert!((v - (-0.4161468365471424)).abs() < 1e-9);
    }

    #[test]
    fn conditional_pairs_spot_values() {
        let c = conditional_pair_correlations(rs(0.0)).unwrap();
        assert!((c.eta_positive - 1.0).abs() < 1e-9 && (c.eta_non_positive + 1.0).abs() < 1e-9);
        let c = conditional_pair_correlations(rs(std::f64::consts::FRAC_PI_4)).unwrap();
        assert!((c.eta_positive - FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((c.eta_non_positive + FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(c.whole.abs() < 1e-12);
    }

    #[test]
    fn partition_masses() {
        let m = partition_measures(rs(FRAC_PI_3));
        assert!((m.pp - 0.375).abs() < 1e-12);
        assert!((m.pm - 0.125).abs() < 1e-12);
        assert!((m.difference() - 0.5).abs() < 1e-12);
        assert!((m.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_check_small() {
        let c = star_correlation_check(rs(FRAC_PI_2), 2000, 3).unwrap();
        assert_eq!(c.violations, 0);
        assert_eq!(c.response_mismatches, 0);
        assert_eq!(c.mean, 1.0);
    }

    #[test]
    fn records_are_pure_caches() {
        let s = ScheduleSpec::fixed(Angle::wrap(0.3), Angle::wrap(-1.1), Angle::wrap(2.0));
        let recs = run_trials(&s, 100, Angle::wrap(0.5), 11).unwrap();
        for r in recs {
            let again = Model::REFERENCE
                .outcomes(r.hidden, r.settings.effective_delta())
                .unwrap();
            assert_eq!(again, r.outcomes);
        }
    }

    #[test]
    fn joint_table_orders_like_oracle() {
        let probe = JointProbe {
            angles: [Angle::ZERO; 3],
            n_trials: 4000,
            seed: 1,
        };
        let t = compare_with_oracle(&[[Angle::ZERO; 3]], Angle::ZERO, Some(probe)).unwrap();
        let j = t.joint.unwrap();
        assert_eq!(j.outcomes[0], [1, 1, 1]);
        assert_eq!(j.outcomes[7], [-1, -1, -1]);
        // odd-parity tuples never occur at Δ_eff = 0 in either table
        for (k, o) in j.outcomes.iter().enumerate() {
            if o[0] * o[1] * o[2] == -1 {
                assert_eq!(j.model[k], 0.0);
                assert!(j.oracle[k].abs() < 1e-12);
            }
        }
        assert!((t.max_discrepancy).abs() < 1e-9);
    }
}
