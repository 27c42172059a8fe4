//! Exact and Monte Carlo verification tools for weak laws of large numbers
//! on finite discrete distributions and finite de Finetti mixtures.
//!
//! The crate is organized around the pipeline:
//!
//! * [`dist`] — exact rational laws, symmetrization, mixing families;
//! * [`feller`] — truncated-moment statistics, integral identities, and the
//!   classical condition checkers;
//! * [`exch`] — conditional statistics over mixtures and the exchangeable
//!   condition checkers;
//! * [`counterexample`] — the gliding-hump families and the tail oscillator,
//!   built and verified exactly;
//! * [`mc`] — seeded, splittable Monte Carlo for the probabilistic bounds,
//!   plus the finite-partition measure change;
//! * [`report`] — canonical CSV/JSON rendering.
//!
//! Everything outside [`mc`] is exact rational arithmetic; nothing here uses
//! floating point except the Monte Carlo estimates themselves.

pub mod counterexample;
pub mod dist;
pub mod exch;
pub mod feller;
pub mod mc;
pub mod rational;
pub mod report;

pub use dist::{DiscreteDistribution, DistError, MixingFamily, TailConvention};
pub use exch::{CondStatSlice, ExchReport, StatKind};
pub use feller::{ConditionReport, FellerProfile, Verdict};
pub use mc::{MCEstimate, PartitionModel, Seed};
pub use rational::{format_rational, parse_rational, Rational};
