//! The invariant battery behind `ghz-lab verify`.
//!
//! Every check takes a [`Model`], so the same battery can be pointed at a
//! deliberately broken chart map and is expected to fail by name.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::experiment::{
    conditional_pairs_with, quadrature_triple_with, run_trials_with, star_check_with,
    torus_integral, uniform_grid, CorrelatorReport, ScheduleSpec,
};
use crate::lhv::{g, omega_cdf, region_of, LhvError, Model, RelativeSetting};
use crate::rng::draw_hidden;
use crate::stats;

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const QUADRATURE_TOL: f64 = 1e-9;
pub const PUSHFORWARD_TOL: f64 = 1e-6;
pub const KS_TOL: f64 = 0.002;
/// Number of `Δ` values for the measure-preservation checks.
pub const MEASURE_GRID: usize = 64;
/// Number of `Δ` values for the quadrature correlation law.
pub const LAW_GRID: usize = 128;

// Finite-difference step and distance kept from every breakpoint.
const FD_STEP: f64 = 1e-7;
const FD_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, value: f64, threshold: f64, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            value,
            threshold,
            detail,
        }
    }

    fn error(name: &str, e: impl std::fmt::Display) -> Self {
        CheckResult::new(name, f64::NAN, 0.0, false, format!("error: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Monte Carlo trials for the per-trial and statistical checks.
    pub trials: u64,
    /// Samples per `Δ` for the transformed-sample KS check.
    pub ks_samples: u64,
    /// Points per `Δ` for the change-of-variables check.
    pub pushforward_points: usize,
    /// Trials per `Δ` for the star check.
    pub star_trials: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 1_000_000,
            ks_samples: 1_000_000,
            pushforward_points: 100_000,
            star_trials: 100_000,
            seed: 0,
        }
    }
}

/// Runs every check in order.
pub fn run_suite(model: &Model, cfg: &VerifyConfig) -> Vec<CheckResult> {
    vec![
        check_normalization(),
        check_g_symmetries(),
        check_pushforward(model, cfg.pushforward_points),
        check_transformed_ks(model, cfg.ks_samples, cfg.seed),
        check_bijectivity(model),
        check_partition_measures(),
        check_correlation_law(model),
        check_conditional_correlations(model),
        check_product_structure(model, cfg.seed),
        check_per_trial_exactness(model, cfg.trials, cfg.seed),
        check_singles_and_pairs(model, cfg.trials, cfg.seed),
        check_star_remap(model, cfg.star_trials, cfg.seed),
    ]
}

pub fn check_normalization() -> CheckResult {
    let total = torus_integral(RelativeSetting::radians(0.0), |_| 1.0);
    let err = (total - 1.0).abs();
    CheckResult::new(
        "normalization",
        err,
        NORMALIZATION_TOL,
        err < NORMALIZATION_TOL,
        format!("integral of density = {total:.15}"),
    )
}

pub fn check_g_symmetries() -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let w = -PI + 2.0 * PI * (k as f64 + 0.5) / 10_000.0;
        let base = g(w);
        let ulp = f64::EPSILON * 0.25;
        let d = (g(-w) - base).abs().max((g(w + PI) - base).abs());
        worst = worst.max(d / ulp);
    }
    // measured in units of eps/4, the spacing of values near g's maximum
    CheckResult::new(
        "g_symmetries",
        worst,
        4.0,
        worst <= 4.0,
        "max |g(-w) - g(w)|, |g(w+pi) - g(w)| in units of eps/4".into(),
    )
}

/// Split points of `L(·; Δ)`.
pub fn chart_breakpoints(delta: f64) -> Vec<f64> {
    let mut b = vec![-PI, 0.0, delta, PI];
    b.push(if delta >= 0.0 { delta - PI } else { delta + PI });
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Worst `|g(L(ω)) |L'(ω)| − g(ω)|` over `points` values of `ω` kept away
/// from the breakpoints; `L'` by central differences.
pub fn pushforward_deviation(model: &Model, delta: RelativeSetting, points: usize) -> Result<f64, LhvError> {
    let d = delta.value();
    let b = chart_breakpoints(d);
    let segments: Vec<(f64, f64)> = b
        .windows(2)
        .map(|w| (w[0] + FD_MARGIN, w[1] - FD_MARGIN))
        .filter(|(a, b)| b > a)
        .collect();
    let total_len: f64 = segments.iter().map(|(a, b)| b - a).sum();
    let mut worst: f64 = 0.0;
    for &(a, b) in &segments {
        let n = ((points as f64) * (b - a) / total_len).ceil() as usize;
        for k in 0..n {
            let w = a + (b - a) * (k as f64 + 0.5) / n as f64;
            let lp = model.transform(Angle::wrap(w + FD_STEP), delta)?.value();
            let lm = model.transform(Angle::wrap(w - FD_STEP), delta)?.value();
            let l0 = model.transform(Angle::wrap(w), delta)?.value();
            let slope = Angle::wrap(lp - lm).value() / (2.0 * FD_STEP);
            worst = worst.max((g(l0) * slope.abs() - g(w)).abs());
        }
    }
    Ok(worst)
}

/// KS distance between `L(ω; Δ)` of `n` sampled `ω` and the `ω` marginal.
pub fn transformed_ks(model: &Model, delta: RelativeSetting, n: u64, seed: u64) -> Result<f64, LhvError> {
    ks_of_moved(model, delta, &sampled_omegas(n, seed))
}

fn sampled_omegas(n: u64, seed: u64) -> Vec<Angle> {
    (0..n).into_par_iter().map(|i| draw_hidden(seed, i).omega).collect()
}

fn ks_of_moved(model: &Model, delta: RelativeSetting, omegas: &[Angle]) -> Result<f64, LhvError> {
    let mut moved = omegas
        .iter()
        .map(|&w| model.transform(w, delta).map(Angle::value))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(stats::ks_one_sample(&mut moved, omega_cdf))
}

pub fn check_pushforward(model: &Model, points: usize) -> CheckResult {
    let name = "measure_preservation_jacobian";
    let devs: Result<Vec<f64>, LhvError> = uniform_grid(MEASURE_GRID)
        .par_iter()
        .map(|&d| pushforward_deviation(model, d.into(), points))
        .collect();
    match devs {
        Ok(v) => {
            let worst = v.iter().copied().fold(0.0, f64::max);
            CheckResult::new(
                name,
                worst,
                PUSHFORWARD_TOL,
                worst < PUSHFORWARD_TOL,
                format!("{MEASURE_GRID} deltas, {points} points each"),
            )
        }
        Err(e) => CheckResult::error(name, e),
    }
}

pub fn check_transformed_ks(model: &Model, n: u64, seed: u64) -> CheckResult {
    let name = "measure_preservation_ks";
    // One sample of ω, pushed through every Δ.
    let omegas = sampled_omegas(n, seed);
    let ks: Result<Vec<f64>, LhvError> = uniform_grid(MEASURE_GRID)
        .par_iter()
        .map(|&d| ks_of_moved(model, d.into(), &omegas))
        .collect();
    match ks {
        Ok(v) => {
            let worst = v.iter().copied().fold(0.0, f64::max);
            CheckResult::new(
                name,
                worst,
                KS_TOL,
                worst < KS_TOL,
                format!("{MEASURE_GRID} deltas, {n} samples each"),
            )
        }
        Err(e) => CheckResult::error(name, e),
    }
}

/// Each printed piece of `L` is monotone and the four images tile the circle.
pub fn chart_tiling_defect(model: &Model, delta: RelativeSetting) -> Result<f64, LhvError> {
    const K: usize = 2000;
    let b = chart_breakpoints(delta.value());
    let mut images = Vec::new();
    let mut defect: f64 = 0.0;
    for w in b.windows(2) {
        let vals = (0..K)
            .map(|k| {
                let x = w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / K as f64;
                model.transform(Angle::wrap(x), delta).map(Angle::value)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let increasing = vals.windows(2).all(|p| p[1] > p[0]);
        let decreasing = vals.windows(2).all(|p| p[1] < p[0]);
        if !(increasing || decreasing) {
            defect = defect.max(1.0);
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // sample midpoints stop short of the ends by half a cell
        let pad = (w[1] - w[0]) / K as f64;
        images.push((lo, hi, pad));
    }
    images.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in images.windows(2) {
        // overlap between consecutive images
        defect = defect.max(pair[0].1 - pair[1].0);
    }
    let covered: f64 = images.iter().map(|(lo, hi, _)| hi - lo).sum();
    let gap = (2.0 * PI - covered).abs();
    // a piece of width h may leave an O(sqrt(h/K)) sliver near a square-root end
    let allowance: f64 = images.iter().map(|(_, _, pad)| 4.0 * pad.sqrt()).sum();
    defect = defect.max((gap - allowance).max(0.0));
    Ok(defect)
}

pub fn check_bijectivity(model: &Model) -> CheckResult {
    let name = "chart_bijectivity";
    let r: Result<Vec<f64>, LhvError> = uniform_grid(MEASURE_GRID)
        .par_iter()
        .map(|&d| chart_tiling_defect(model, d.into()))
        .collect();
    match r {
        Ok(v) => {
            let worst = v.iter().copied().fold(0.0, f64::max);
            CheckResult::new(name, worst, 1e-9, worst <= 1e-9, "monotone pieces tiling [-pi, pi)".into())
        }
        Err(e) => CheckResult::error(name, e),
    }
}

pub fn check_partition_measures() -> CheckResult {
    let mut worst: f64 = 0.0;
    for k in 0..=64 {
        let d = PI * k as f64 / 64.0;
        let delta = RelativeSetting::radians(d);
        // Δ = π wraps to -π; the mirrored partition covers it
        let m = crate::experiment::partition_measures(delta);
        let c = d.cos();
        let errs = [
            m.pp - (1.0 + c) / 4.0,
            m.mm - (1.0 + c) / 4.0,
            m.pm - (1.0 - c) / 4.0,
            m.mp - (1.0 - c) / 4.0,
            m.difference() - c,
        ];
        worst = errs.iter().fold(worst, |w, e| w.max(e.abs()));
    }
    CheckResult::new(
        "partition_measures",
        worst,
        QUADRATURE_TOL,
        worst < QUADRATURE_TOL,
        "65 deltas on [0, pi]".into(),
    )
}

pub fn check_correlation_law(model: &Model) -> CheckResult {
    let name = "correlation_law";
    let errs: Result<Vec<f64>, LhvError> = uniform_grid(LAW_GRID)
        .par_iter()
        .map(|&d| Ok((quadrature_triple_with(model, d.into())? - d.value().cos()).abs()))
        .collect();
    match errs {
        Ok(v) => {
            let worst = v.iter().copied().fold(0.0, f64::max);
            CheckResult::new(name, worst, QUADRATURE_TOL, worst < QUADRATURE_TOL, format!("{LAW_GRID} deltas"))
        }
        Err(e) => CheckResult::error(name, e),
    }
}

pub fn check_conditional_correlations(model: &Model) -> CheckResult {
    let name = "conditional_correlations";
    let errs: Result<Vec<f64>, LhvError> = uniform_grid(MEASURE_GRID)
        .par_iter()
        .map(|&d| {
            let c = conditional_pairs_with(model, d.into())?;
            let cos = d.value().cos();
            Ok((c.eta_positive - cos)
                .abs()
                .max((c.eta_non_positive + cos).abs())
                .max(c.whole.abs()))
        })
        .collect();
    match errs {
        Ok(v) => {
            let worst = v.iter().copied().fold(0.0, f64::max);
            CheckResult::new(name, worst, QUADRATURE_TOL, worst < QUADRATURE_TOL, format!("{MEASURE_GRID} deltas"))
        }
        Err(e) => CheckResult::error(name, e),
    }
}

/// `s_A s_B` equals the region parity on `η > 0` and its negative on `η ≤ 0`.
pub fn check_product_structure(model: &Model, seed: u64) -> CheckResult {
    let name = "product_structure";
    let per_delta: Result<Vec<u64>, LhvError> = uniform_grid(MEASURE_GRID)
        .par_iter()
        .map(|&d| {
            let delta: RelativeSetting = d.into();
            let mut bad = 0u64;
            for i in 0..10_000 {
                let h = draw_hidden(seed, i);
                let [a, b, _] = model.outcomes(h, delta)?;
                let parity = region_of(h.omega, delta).parity();
                let expected = if h.eta.value() > 0.0 { parity } else { -parity };
                bad += u64::from(a * b != expected);
            }
            Ok(bad)
        })
        .collect();
    match per_delta {
        Ok(v) => {
            let bad: u64 = v.iter().sum();
            CheckResult::new(
                name,
                bad as f64,
                0.0,
                bad == 0,
                format!("{MEASURE_GRID} deltas x 10000 configurations"),
            )
        }
        Err(e) => CheckResult::error(name, e),
    }
}

pub fn check_per_trial_exactness(model: &Model, trials: u64, seed: u64) -> CheckResult {
    let name = "per_trial_exactness";
    let mut exceptions = 0u64;
    for (delta, expected) in [(0.0, 1i8), (PI, -1i8)] {
        match run_trials_with(model, &ScheduleSpec::fixed_delta(delta), trials, Angle::ZERO, seed) {
            Ok(recs) => exceptions += recs.iter().filter(|r| r.product() != expected).count() as u64,
            Err(e) => return CheckResult::error(name, e),
        }
    }
    CheckResult::new(
        name,
        exceptions as f64,
        0.0,
        exceptions == 0,
        format!("delta in {{0, pi}}, {trials} trials each"),
    )
}

pub fn check_singles_and_pairs(model: &Model, trials: u64, seed: u64) -> CheckResult {
    let name = "singles_and_pairs";
    let bound = 5.0 / (trials as f64).sqrt();
    let mut worst: f64 = 0.0;
    for delta in [0.0, FRAC_PI_4, FRAC_PI_2, 2.0, PI] {
        let recs = match run_trials_with(model, &ScheduleSpec::fixed_delta(delta), trials, Angle::ZERO, seed) {
            Ok(r) => r,
            Err(e) => return CheckResult::error(name, e),
        };
        let r = match CorrelatorReport::from_outcomes(recs.iter().map(|r| r.outcomes)) {
            Ok(r) => r,
            Err(e) => return CheckResult::error(name, e),
        };
        worst = r.singles.iter().chain(&r.pairs).fold(worst, |w, x| w.max(x.abs()));
    }
    CheckResult::new(name, worst, bound, worst < bound, "5/sqrt(N) bound, 5 deltas".into())
}

pub fn check_star_remap(model: &Model, trials: u64, seed: u64) -> CheckResult {
    let name = "star_remap";
    let mut bad = 0u64;
    for d in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
        match star_check_with(model, RelativeSetting::radians(d), trials, seed) {
            Ok(c) => bad += c.violations + c.response_mismatches,
            Err(e) => return CheckResult::error(name, e),
        }
    }
    CheckResult::new(
        name,
        bad as f64,
        0.0,
        bad == 0,
        format!("delta in {{0, pi/4, pi/2, 3pi/4}}, {trials} trials each"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pushforward_reference_is_tight() {
        let d = RelativeSetting::radians(1.1);
        let dev = pushforward_deviation(&Model::REFERENCE, d, 20_000).unwrap();
        assert!(dev < 1e-7, "dev={dev}");
        let d = RelativeSetting::radians(-2.3);
        assert!(pushforward_deviation(&Model::REFERENCE, d, 20_000).unwrap() < 1e-7);
    }

    #[test]
    fn tiling_reference() {
        for d in [0.0, 0.4, 2.5, -0.4, -2.5, -PI] {
            let defect = chart_tiling_defect(&Model::REFERENCE, RelativeSetting::radians(d)).unwrap();
            assert!(defect <= 1e-9, "d={d} defect={defect}");
        }
    }

    #[test]
    fn small_suite_passes() {
        let cfg = VerifyConfig {
            trials: 20_000,
            ks_samples: 20_000,
            pushforward_points: 5_000,
            star_trials: 5_000,
            seed: 1,
        };
        // the KS bound is only meaningful at 10^6 samples; skip it here
        for r in run_suite(&Model::REFERENCE, &cfg) {
            if r.name == "measure_preservation_ks" {
                assert!(r.value < 0.02);
                continue;
            }
            assert!(r.passed, "{r:?}");
        }
    }
}
