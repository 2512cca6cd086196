//! Pathwise stochastic integration on sampled paths.
//!
//! The crate works on a single continuous path sampled on a finite grid and
//! builds, without any probabilistic model:
//!
//! * crossing-time partition ladders and their counting functions
//!   ([`partitions`]),
//! * discrete quadratic variation and covariation along those ladders, with
//!   Föllmer-type convergence reports ([`quadvar`]),
//! * step-function integrals, the model-free Itô integral as a ladder limit
//!   with rate tracking, and explicit superhedging strategies that certify
//!   the pathwise Hoeffding and isometry inequalities ([`integration`]),
//! * the Itô rough path of the sample, controlled paths, compensated and
//!   plain Riemann rough integrals, Stratonovich conversion, Föllmer's Itô
//!   formula and Davie's block-sum criterion ([`roughpath`]),
//! * a JSON-configured experiment runner behind the `pathwise` binary
//!   ([`experiment`]).
//!
//! Matrices are row-major; `S_s S_{s,t}` and `∫ S dS` are `d x d` with the
//! row index on the integrand coordinate.

pub mod error;
pub mod experiment;
pub mod integration;
pub mod partitions;
pub mod paths;
pub mod quadvar;
pub mod rng;
pub mod roughpath;

pub use error::{Error, Result};
pub use paths::SamplePath;
