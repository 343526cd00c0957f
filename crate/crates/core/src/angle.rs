//! Angles on the circle, canonicalized to `[-π, π)`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AngleError {
    #[error("angle must be finite, got {0}")]
    NonFinite(f64),
}

/// An angle in radians, always stored in the canonical range `[-π, π)`.
///
/// Both ends of the circle (`-π` and `+π`) map to `-π`. Code that needs the
/// `(-π, π]` convention (the response functions) treats `-π` as `+π`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const MINUS_PI: Angle = Angle(-PI);

    /// Canonicalizes `x` into `[-π, π)`.
    pub fn new(x: f64) -> Result<Self, AngleError> {
        canonicalize_angle(x)
    }

    /// Canonicalizes a value the caller knows to be finite.
    ///
    /// Panics on NaN or infinity.
    pub fn wrap(x: f64) -> Self {
        canonicalize_angle(x).expect("finite angle")
    }

    pub fn from_degrees(deg: f64) -> Result<Self, AngleError> {
        Self::new(deg.to_radians())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Shift by half a turn.
    pub fn flip(self) -> Angle {
        Angle::wrap(self.0 + PI)
    }
}

/// Sum, wrapped.
impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, other: Angle) -> Angle {
        Angle::wrap(self.0 + other.0)
    }
}

/// Negation, wrapped (so `-(-π) = -π`).
impl std::ops::Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::wrap(-self.0)
    }
}

impl TryFrom<f64> for Angle {
    type Error = AngleError;
    fn try_from(x: f64) -> Result<Self, Self::Error> {
        Angle::new(x)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Reduce `x` modulo 2π into `[-π, π)`.
pub fn canonicalize_angle(x: f64) -> Result<Angle, AngleError> {
    if !x.is_finite() {
        return Err(AngleError::NonFinite(x));
    }
    if (-PI..PI).contains(&x) {
        return Ok(Angle(x));
    }
    let mut y = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if y >= PI {
        y -= TAU;
    }
    if y < -PI {
        y = -PI;
    }
    Ok(Angle(y))
}
