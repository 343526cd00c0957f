//! Dense state-vector reference for GHZ spin correlations.
//!
//! Basis ordering: site 0 (particle A) is the most significant bit of the
//! basis index. Spin down is bit 0 and spin up is bit 1. The in-plane
//! operators use the standard `σ_x`, `σ_y` matrices of that computational
//! basis and `Z = diag(-1, +1)` so that `Z|↑⟩ = +|↑⟩`. With these choices the
//! triple correlator of `(|↑↑↑⟩ + e^{iΦ}|↓↓↓⟩)/√2` is `cos(α + β + γ + Φ)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::Angle;

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 12;

const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("particle count {0} outside [{MIN_SITES}, {MAX_SITES}]")]
    SiteCount(usize),
    #[error("observable has {got} sites, state has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("joint distribution needs a measured observable on every site")]
    IdentityInJoint,
    #[error("expectation has imaginary part {0}")]
    NotReal(f64),
}

pub type Matrix2 = [[Complex64; 2]; 2];

/// Pure state of `n` spin-1/2 particles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self, OracleError> {
        check_sites(n)?;
        if amplitudes.len() != 1 << n {
            return Err(OracleError::DimensionMismatch {
                expected: 1 << n,
                got: amplitudes.len(),
            });
        }
        Ok(QuantumState { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn check_sites(n: usize) -> Result<(), OracleError> {
    if (MIN_SITES..=MAX_SITES).contains(&n) {
        Ok(())
    } else {
        Err(OracleError::SiteCount(n))
    }
}

/// `(|↑…↑⟩ + e^{iΦ}|↓…↓⟩)/√2`.
pub fn ghz_state(n: usize, phi: Angle) -> Result<QuantumState, OracleError> {
    check_sites(n)?;
    let dim = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    amplitudes[dim - 1] = Complex64::new(h, 0.0);
    amplitudes[0] = Complex64::from_polar(h, phi.value());
    Ok(QuantumState { n, amplitudes })
}

/// Per-site observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SiteObservable {
    /// `cos α σ_x + sin α σ_y`
    XY(Angle),
    Z,
    Identity,
}

impl SiteObservable {
    pub const X: SiteObservable = SiteObservable::XY(Angle::ZERO);

    pub fn y() -> SiteObservable {
        SiteObservable::XY(Angle::wrap(std::f64::consts::FRAC_PI_2))
    }

    pub fn matrix(self) -> Matrix2 {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self {
            SiteObservable::XY(a) => xy_observable(a),
            SiteObservable::Z => [[-one, z], [z, one]],
            SiteObservable::Identity => [[one, z], [z, one]],
        }
    }
}

/// Tensor-product observable, one entry per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec(pub Vec<SiteObservable>);

impl ObservableSpec {
    pub fn xy(angles: &[Angle]) -> Self {
        ObservableSpec(angles.iter().map(|&a| SiteObservable::XY(a)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Spin component along the in-plane direction at angle `alpha` from x.
pub fn xy_observable(alpha: Angle) -> Matrix2 {
    let z = Complex64::new(0.0, 0.0);
    let e = Complex64::from_polar(1.0, alpha.value());
    // cos α σ_x + sin α σ_y = [[0, e^{-iα}], [e^{iα}, 0]]
    [[z, e.conj()], [e, z]]
}

// Applies `m` to `site` in place; cost 2^n.
fn apply_site(amps: &mut [Complex64], n: usize, site: usize, m: &Matrix2) {
    let stride = 1usize << (n - 1 - site);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

fn apply_spec(state: &QuantumState, spec: &ObservableSpec) -> Result<Vec<Complex64>, OracleError> {
    if spec.len() != state.n {
        return Err(OracleError::DimensionMismatch {
            expected: state.n,
            got: spec.len(),
        });
    }
    let mut out = state.amplitudes.clone();
    for (site, obs) in spec.0.iter().enumerate() {
        if *obs != SiteObservable::Identity {
            apply_site(&mut out, state.n, site, &obs.matrix());
        }
    }
    Ok(out)
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨ψ| O_1 ⊗ … ⊗ O_n |ψ⟩`.
pub fn expectation(state: &QuantumState, spec: &ObservableSpec) -> Result<f64, OracleError> {
    let applied = apply_spec(state, spec)?;
    let v = inner(&state.amplitudes, &applied);
    if v.im.abs() > IMAG_TOL {
        return Err(OracleError::NotReal(v.im));
    }
    Ok(v.re)
}

/// Born-rule probabilities of every `±1` outcome tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    /// Keyed by outcome tuple; `BTreeMap` keeps iteration order stable.
    pub table: BTreeMap<Vec<i8>, f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, outcome: &[i8]) -> f64 {
        self.table.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.table.values().sum()
    }

    /// Expectation of the product over the listed sites.
    pub fn correlator(&self, sites: &[usize]) -> f64 {
        self.table
            .iter()
            .map(|(k, p)| p * sites.iter().map(|&s| k[s] as f64).product::<f64>())
            .sum()
    }

    /// Probabilities in the canonical order of [`outcome_tuples`].
    pub fn as_vec(&self, n: usize) -> Vec<f64> {
        outcome_tuples(n).iter().map(|k| self.probability(k)).collect()
    }
}

/// All `±1` tuples of length `n`, `+1` before `-1`, site 0 varying slowest.
pub fn outcome_tuples(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|s| if bits >> (n - 1 - s) & 1 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

/// Joint distribution from the projectors `(1 ± O)/2` on each site.
pub fn joint_distribution(
    state: &QuantumState,
    spec: &ObservableSpec,
) -> Result<OutcomeDistribution, OracleError> {
    if spec.len() != state.n {
        return Err(OracleError::DimensionMismatch {
            expected: state.n,
            got: spec.len(),
        });
    }
    if spec.0.contains(&SiteObservable::Identity) {
        return Err(OracleError::IdentityInJoint);
    }
    let half = Complex64::new(0.5, 0.0);
    let mut table = BTreeMap::new();
    for outcome in outcome_tuples(state.n) {
        let mut amps = state.amplitudes.clone();
        for (site, (obs, &s)) in spec.0.iter().zip(&outcome).enumerate() {
            let m = obs.matrix();
            let sign = Complex64::new(s as f64, 0.0);
            let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                    p[r][c] = half * (id + sign * m[r][c]);
                }
            }
            apply_site(&mut amps, state.n, site, &p);
        }
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        table.insert(outcome, prob);
    }
    Ok(OutcomeDistribution { table })
}

/// Triple XY correlator of the three-particle GHZ state.
pub fn ghz_triple(alpha: Angle, beta: Angle, gamma: Angle, phi: Angle) -> Result<f64, OracleError> {
    let state = ghz_state(3, phi)?;
    expectation(&state, &ObservableSpec::xy(&[alpha, beta, gamma]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn a(x: f64) -> Angle {
        Angle::wrap(x)
    }

    #[test]
    fn ghz_amplitudes() {
        let s = ghz_state(3, a(0.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.amplitudes()[0], Complex64::new(h, 0.0));
        assert_eq!(s.amplitudes()[7], Complex64::new(h, 0.0));
        let s = ghz_state(3, a(PI)).unwrap();
        // all-down is index 0
        assert!((s.amplitudes()[0] - Complex64::new(-h, 0.0)).norm() < 1e-15);
        assert_eq!(s.amplitudes()[7], Complex64::new(h, 0.0));
        for n in 2..=12 {
            let s = ghz_state(n, a(0.3 * n as f64)).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ghz_state(1, a(0.0)), Err(OracleError::SiteCount(1)));
        assert_eq!(ghz_state(13, a(0.0)), Err(OracleError::SiteCount(13)));
    }

    #[test]
    fn xy_matrices() {
        let x = xy_observable(a(0.0));
        assert_eq!(x[0][1], Complex64::new(1.0, 0.0));
        assert_eq!(x[1][0], Complex64::new(1.0, 0.0));
        let y = xy_observable(a(FRAC_PI_2));
        assert!((y[0][1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((y[1][0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        // hermitian, traceless, squares to identity => eigenvalues ±1
        let m = xy_observable(a(0.37));
        assert_eq!(m[0][0] + m[1][1], Complex64::new(0.0, 0.0));
        assert!((m[0][1] - m[1][0].conj()).norm() < 1e-15);
        let sq00 = m[0][0] * m[0][0] + m[0][1] * m[1][0];
        let sq01 = m[0][0] * m[0][1] + m[0][1] * m[1][1];
        assert!((sq00 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(sq01.norm() < 1e-15);
    }

    #[test]
    fn singles_and_pairs_vanish() {
        let s = ghz_state(3, a(0.4)).unwrap();
        let id = SiteObservable::Identity;
        let xy = |x: f64| SiteObservable::XY(a(x));
        let e1 = expectation(&s, &ObservableSpec(vec![xy(0.9), id, id])).unwrap();
        let e2 = expectation(&s, &ObservableSpec(vec![xy(0.9), xy(-1.3), id])).unwrap();
        assert!(e1.abs() < 1e-12 && e2.abs() < 1e-12);
    }

    #[test]
    fn z_statistics() {
        let s = ghz_state(3, a(0.0)).unwrap();
        let id = SiteObservable::Identity;
        let z = SiteObservable::Z;
        assert!((expectation(&s, &ObservableSpec(vec![z, z, id])).unwrap() - 1.0).abs() < 1e-12);
        assert!(expectation(&s, &ObservableSpec(vec![z, id, id])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let s = ghz_state(3, a(0.0)).unwrap();
        let spec = ObservableSpec::xy(&[a(0.0), a(0.0)]);
        assert!(matches!(
            expectation(&s, &spec),
            Err(OracleError::DimensionMismatch { .. })
        ));
        let spec = ObservableSpec(vec![SiteObservable::X, SiteObservable::X, SiteObservable::Identity]);
        assert_eq!(joint_distribution(&s, &spec), Err(OracleError::IdentityInJoint));
    }

    #[test]
    fn paradox_distributions() {
        let s = ghz_state(3, a(0.0)).unwrap();
        let xxx = joint_distribution(&s, &ObservableSpec(vec![SiteObservable::X; 3])).unwrap();
        let y = SiteObservable::y();
        let xyy = joint_distribution(&s, &ObservableSpec(vec![SiteObservable::X, y, y])).unwrap();
        for k in outcome_tuples(3) {
            let even = k.iter().map(|&v| v as i32).product::<i32>() == 1;
            let (pe, po) = (xxx.probability(&k), xyy.probability(&k));
            if even {
                assert!((pe - 0.25).abs() < 1e-12 && po.abs() < 1e-12);
            } else {
                assert!(pe.abs() < 1e-12 && (po - 0.25).abs() < 1e-12);
            }
        }
        assert!((xxx.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mermin_value() {
        let (x, y) = (a(0.0), a(FRAC_PI_2));
        let zero = a(0.0);
        let m = ghz_triple(x, x, x, zero).unwrap()
            - ghz_triple(x, y, y, zero).unwrap()
            - ghz_triple(y, x, y, zero).unwrap()
            - ghz_triple(y, y, x, zero).unwrap();
        assert!((m - 4.0).abs() < 1e-12);
    }
}
