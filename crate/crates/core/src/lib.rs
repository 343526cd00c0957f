//! A local hidden-variable model for three-particle GHZ correlations.
//!
//! The crate has four layers:
//!
//! * [`lhv`]: the model itself (torus density, sampler, response functions,
//!   the chart map between observers, the region partition, the starred
//!   re-labelling);
//! * [`oracle`]: a dense state-vector calculation of the quantum predictions;
//! * [`experiment`]: seeded trial generation, exact quadrature, and the
//!   reports built on top of them;
//! * [`stations`]: a message-passing harness where each station only ever
//!   sees its own setting.
//!
//! [`cli`] wires these into the `ghz-lab` binary, and [`verify`] holds the
//! invariant battery that `ghz-lab verify` runs.

pub mod angle;
pub mod cli;
pub mod experiment;
pub mod lhv;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod stations;
pub mod stats;
pub mod verify;

pub use angle::{canonicalize_angle, Angle, AngleError};
pub use lhv::{HiddenConfig, Model, RegionTag, RelativeSetting};
