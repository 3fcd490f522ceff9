//! Exact-arithmetic toolkit for the thermodynamics of computation.
//!
//! The crate models computational states as partitions of finite physical
//! microstate spaces, realizes stochastic and irreversible computational
//! operations as bijective microstate dynamics, and verifies the entropy
//! bookkeeping (Landauer's principle, the computational/non-computational
//! entropy decomposition, correlation loss) by direct enumeration.
//!
//! Probabilities are exact rationals throughout, so conservation laws are
//! checked with zero tolerance; only logarithmic measures (entropies,
//! mutual informations) are floating point.

pub mod dynamics;
pub mod error;
pub mod infomath;
pub mod realize;
pub mod scenarios;
pub mod statespace;
pub mod treeviz;

pub use error::{Error, Result};
pub use infomath::{Distribution, DualValue, JointDistribution, LogUnit, Rational};

/// Absolute tolerance for every floating-point identity in the crate.
/// Probability identities are exact and use no tolerance at all.
pub const FLOAT_TOL: f64 = 1e-12;
