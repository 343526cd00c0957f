//! Geometry of the hidden-variable model.
//!
//! Each emitted triple carries a hidden configuration `(ω, η)` on the torus
//! `[-π, π) × [-π, π)`, distributed with density `|sin ω| / (8π)`. Observer A
//! reads `ω` in its own chart; observer B's chart is related to A's by the
//! piecewise map [`transform_l`] (plus a half-turn on `η ≤ 0`); observer C
//! only looks at the sign of `η`.
//!
//! Boundary conventions, used consistently across this module:
//!
//! * the response intervals are written on `(-π, π]`, so `ω = -π` is treated
//!   as `+π` by [`sign_s`];
//! * `η = -π` falls in the `η ≤ 0` branch everywhere;
//! * [`q_factor`] takes `sign(0) = +1`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::Angle;

/// Slack allowed on `acos` arguments before a branch is declared broken.
pub const ACOS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LhvError {
    #[error("acos argument {arg} out of range at omega={omega}, delta={delta}")]
    AcosOutOfRange { arg: f64, omega: f64, delta: f64 },
    #[error("region partition needs delta in [0, pi], got {0}")]
    DeltaOutOfRange(f64),
    #[error("region tag {given} does not match classification {expected}")]
    InconsistentRegion { given: RegionTag, expected: RegionTag },
}

/// One point of the hidden-variable torus, in observer A's chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenConfig {
    pub omega: Angle,
    pub eta: Angle,
}

impl HiddenConfig {
    pub fn new(omega: Angle, eta: Angle) -> Self {
        HiddenConfig { omega, eta }
    }
}

/// Effective relative orientation of the three settings and the state phase.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelativeSetting(Angle);

impl RelativeSetting {
    pub fn new(delta: Angle) -> Self {
        RelativeSetting(delta)
    }

    /// Wraps a finite radian value. Panics on NaN or infinity.
    pub fn radians(delta: f64) -> Self {
        RelativeSetting(Angle::wrap(delta))
    }

    pub fn angle(self) -> Angle {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.value()
    }
}

impl From<Angle> for RelativeSetting {
    fn from(a: Angle) -> Self {
        RelativeSetting(a)
    }
}

/// The four cells of the torus partition, named by the signs of
/// `S(ω_A)` and `S(ω_B)` on the `η > 0` half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    /// `ω_A ∈ (Δ, π]`
    PP,
    /// `ω_A ∈ (0, Δ]`
    PM,
    /// `ω_A ∈ (-π, Δ-π]`
    MP,
    /// `ω_A ∈ (Δ-π, 0]`
    MM,
}

impl RegionTag {
    pub const ALL: [RegionTag; 4] = [RegionTag::PP, RegionTag::PM, RegionTag::MP, RegionTag::MM];

    /// True on `PP ∪ MM`, where A and B agree for `η > 0`.
    pub fn is_correlated(self) -> bool {
        matches!(self, RegionTag::PP | RegionTag::MM)
    }

    /// `+1` on `PP ∪ MM`, `-1` on `PM ∪ MP`.
    pub fn parity(self) -> i8 {
        if self.is_correlated() {
            1
        } else {
            -1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionTag::PP => "PP",
            RegionTag::PM => "PM",
            RegionTag::MP => "MP",
            RegionTag::MM => "MM",
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A unit-modulus value used for the transverse-component bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValue(pub Complex64);

impl WeakValue {
    pub fn real(s: i8) -> Self {
        WeakValue(Complex64::new(s as f64, 0.0))
    }
}

impl std::ops::Mul for WeakValue {
    type Output = WeakValue;
    fn mul(self, rhs: WeakValue) -> WeakValue {
        WeakValue(self.0 * rhs.0)
    }
}

/// Marginal density of `ω`: `|sin ω| / 4`.
#[inline]
pub fn g(omega: f64) -> f64 {
    0.25 * omega.sin().abs()
}

/// Joint density on the torus, uniform in `η`.
#[inline]
pub fn density(config: HiddenConfig) -> f64 {
    g(config.omega.value()) / (2.0 * PI)
}

/// CDF of `ω` under [`g`] on `[-π, π)`.
pub fn omega_cdf(omega: f64) -> f64 {
    if omega <= 0.0 {
        (omega.cos() + 1.0) / 4.0
    } else {
        0.5 + (1.0 - omega.cos()) / 4.0
    }
}

/// Inverse-CDF sampler mapping the unit square onto the torus.
pub fn sample_hidden(u: f64, v: f64) -> HiddenConfig {
    debug_assert!((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v));
    let omega = if u < 0.5 {
        -(4.0 * u - 1.0).clamp(-1.0, 1.0).acos()
    } else {
        (3.0 - 4.0 * u).clamp(-1.0, 1.0).acos()
    };
    let eta = -PI + 2.0 * PI * v;
    HiddenConfig {
        omega: Angle::wrap(omega),
        eta: Angle::wrap(eta),
    }
}

/// `+1` on `(0, π]`, `-1` on `(-π, 0]`; `-π` counts as `+π`.
#[inline]
pub fn sign_s(omega: Angle) -> i8 {
    let w = omega.value();
    if w > 0.0 || w == -PI {
        1
    } else {
        -1
    }
}

/// Strong-measurement outcome of A or B given the coordinate in its own chart.
#[inline]
pub fn response(omega_local: Angle, eta: Angle) -> i8 {
    if eta.value() > 0.0 {
        sign_s(omega_local)
    } else {
        -sign_s(omega_local)
    }
}

/// Sign of `(ω - Δ)` reduced into `[-π, π)`, with `sign(0) = +1`.
#[inline]
pub fn q_factor(omega: Angle, delta: RelativeSetting) -> i8 {
    if Angle::wrap(omega.value() - delta.value()).value() >= 0.0 {
        1
    } else {
        -1
    }
}

fn checked_acos(arg: f64, omega: f64, delta: f64) -> Result<f64, LhvError> {
    if !(-1.0 - ACOS_SLACK..=1.0 + ACOS_SLACK).contains(&arg) {
        return Err(LhvError::AcosOutOfRange { arg, omega, delta });
    }
    Ok(arg.clamp(-1.0, 1.0).acos())
}

/// The chart map `L(ω; Δ)` from A's angular coordinate to B's.
///
/// Piecewise in four half-open `ω` intervals, with separate tables for
/// `Δ ≥ 0` and `Δ < 0`. Each piece preserves `cos ω` differences, so
/// `|sin ω| dω` is carried onto itself.
pub fn transform_l(omega: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
    let w = omega.value();
    let d = delta.value();
    if d == 0.0 {
        // The table below reduces to the identity here, up to rounding.
        return Ok(omega);
    }
    let (cd, cw) = (d.cos(), w.cos());
    let arg = if d >= 0.0 {
        if w < d - PI {
            -cd - cw - 1.0
        } else if w < 0.0 {
            cd + cw - 1.0
        } else if w < d {
            cd - cw + 1.0
        } else {
            -cd + cw + 1.0
        }
    } else if w < d {
        -cd + cw + 1.0
    } else if w < 0.0 {
        cd - cw + 1.0
    } else if w < d + PI {
        cd + cw - 1.0
    } else {
        -cd - cw - 1.0
    };
    let magnitude = checked_acos(arg, w, d)?;
    Ok(Angle::wrap(q_factor(omega, delta) as f64 * magnitude))
}

/// B's coordinate for a configuration given in A's chart.
pub fn omega_b_of(omega_a: Angle, eta: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
    Model::REFERENCE.omega_b(omega_a, eta, delta)
}

/// Region of the partition containing `ω_A`, for `Δ ∈ [0, π)`.
pub fn classify_region(omega_a: Angle, delta: RelativeSetting) -> Result<RegionTag, LhvError> {
    let d = delta.value();
    if !(0.0..=PI).contains(&d) {
        return Err(LhvError::DeltaOutOfRange(d));
    }
    Ok(classify_raw(omega_a.value(), d))
}

// `w` in [-π, π), `d` in [0, π]; `-π` is read as `+π`.
fn classify_raw(w: f64, d: f64) -> RegionTag {
    let w = if w == -PI { PI } else { w };
    if w > d {
        RegionTag::PP
    } else if w > 0.0 {
        RegionTag::PM
    } else if w > d - PI {
        RegionTag::MM
    } else {
        RegionTag::MP
    }
}

/// Region for any canonical `Δ`: negative settings are reflected through
/// `(ω, Δ) ↦ (-ω, -Δ)`, which leaves `S(ω)·S(L(ω; Δ))` unchanged.
pub fn region_of(omega_a: Angle, delta: RelativeSetting) -> RegionTag {
    let w = omega_a.value();
    let d = delta.value();
    if d >= 0.0 {
        classify_raw(w, d)
    } else {
        classify_raw(-w, -d)
    }
}

/// Observer C's outcome: the sign of `η`, with `η = 0` counted negative.
#[inline]
pub fn outcome_c(eta: Angle) -> i8 {
    if eta.value() > 0.0 {
        1
    } else {
        -1
    }
}

/// Coordinates after the starred re-labelling of the two subpopulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarCoords {
    pub omega_a: Angle,
    pub omega_b: Angle,
    pub eta: Angle,
}

/// Re-labels a configuration so that C's sign of `η*` tracks whether A and B
/// agree. `region` must be the partition cell of `ω_A` at `delta`.
pub fn star_remap(
    hidden: HiddenConfig,
    omega_b: Angle,
    delta: RelativeSetting,
    region: RegionTag,
) -> Result<StarCoords, LhvError> {
    let expected = region_of(hidden.omega, delta);
    if expected != region {
        return Err(LhvError::InconsistentRegion { given: region, expected });
    }
    Ok(if region.is_correlated() {
        StarCoords {
            omega_a: Angle::wrap(PI - hidden.omega.value()),
            omega_b,
            eta: hidden.eta,
        }
    } else {
        StarCoords {
            omega_a: -hidden.omega,
            omega_b: omega_b.flip(),
            eta: -hidden.eta,
        }
    })
}

/// Transverse component paired with a measured `±1` value: `i · s`.
pub fn weak_y(s_x: i8) -> WeakValue {
    debug_assert!(s_x == 1 || s_x == -1);
    WeakValue(Complex64::new(0.0, s_x as f64))
}

/// The four products XXX, XYY, YXY, YYX built from one assignment of
/// X-values, with each Y replaced by [`weak_y`] of the same particle.
pub fn weak_identity_products(s: [i8; 3]) -> [Complex64; 4] {
    let x = s.map(WeakValue::real);
    let y = s.map(weak_y);
    [
        (x[0] * x[1] * x[2]).0,
        (x[0] * y[1] * y[2]).0,
        (y[0] * x[1] * y[2]).0,
        (y[0] * y[1] * x[2]).0,
    ]
}

/// Chart map used by a [`Model`].
pub type TransformFn = fn(Angle, RelativeSetting) -> Result<Angle, LhvError>;

/// The response model with a pluggable chart map.
///
/// [`Model::REFERENCE`] uses [`transform_l`]; other maps exist so the
/// verification suite can be run against deliberately broken variants.
#[derive(Clone, Copy)]
pub struct Model {
    pub name: &'static str,
    transform: TransformFn,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model").field("name", &self.name).finish()
    }
}

impl Default for Model {
    fn default() -> Self {
        Model::REFERENCE
    }
}

impl Model {
    pub const REFERENCE: Model = Model {
        name: "reference",
        transform: transform_l,
    };

    pub fn with_transform(name: &'static str, transform: TransformFn) -> Self {
        Model { name, transform }
    }

    pub fn transform(&self, omega: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
        (self.transform)(omega, delta)
    }

    pub fn omega_b(&self, omega_a: Angle, eta: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
        let primed = self.transform(omega_a, delta)?;
        Ok(if eta.value() > 0.0 { primed } else { primed.flip() })
    }

    /// `(s_A, s_B, s_C)` for one configuration.
    pub fn outcomes(&self, hidden: HiddenConfig, delta: RelativeSetting) -> Result<[i8; 3], LhvError> {
        let omega_b = self.omega_b(hidden.omega, hidden.eta, delta)?;
        Ok([
            response(hidden.omega, hidden.eta),
            response(omega_b, hidden.eta),
            outcome_c(hidden.eta),
        ])
    }
}
