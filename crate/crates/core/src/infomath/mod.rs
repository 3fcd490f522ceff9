//! Exact-probability distributions and information measures.
//!
//! Probabilities are exact rationals; the measures built on them (surprise,
//! heaviness, entropy, known information, mutual information) are IEEE
//! doubles, reported in a selectable logarithmic unit. All internal
//! computation happens in nats and is converted on output, so the two unit
//! views of any measure differ by exactly a factor of `ln 2`.

mod distribution;
mod joint;
mod rational;

pub use distribution::Distribution;
pub use joint::{Axis, JointDistribution};
pub use rational::Rational;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logarithmic unit for information measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogUnit {
    /// Natural units (base e).
    #[default]
    Nat,
    /// Binary units (base 2); one nat is `1/ln 2` bits.
    Bit,
}

impl LogUnit {
    /// Convert a quantity measured in nats into this unit.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogUnit::Nat => nats,
            LogUnit::Bit => nats / std::f64::consts::LN_2,
        }
    }

    /// Convert a quantity in this unit back to nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            LogUnit::Nat => value,
            LogUnit::Bit => value * std::f64::consts::LN_2,
        }
    }
}

/// A measure reported in both units at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualValue {
    pub nats: f64,
    pub bits: f64,
}

impl DualValue {
    pub fn from_nats(nats: f64) -> Self {
        DualValue {
            nats,
            bits: LogUnit::Bit.from_nats(nats),
        }
    }

    pub fn get(&self, unit: LogUnit) -> f64 {
        match unit {
            LogUnit::Nat => self.nats,
            LogUnit::Bit => self.bits,
        }
    }
}

/// Neumaier-compensated accumulator. Entropy identities are asserted at
/// 1e-12 over supports that can reach 10^6 outcomes; naive summation drifts
/// past that, compensated summation stays near one ulp of the total.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

fn check_probability(p: &Rational) -> Result<()> {
    if p > &Rational::one() {
        return Err(Error::InvalidProbability {
            value: p.to_string(),
        });
    }
    Ok(())
}

/// Surprise `-log p`: the knowledge gained on learning an outcome of
/// probability `p`. Additive over independent events.
pub fn surprise(p: &Rational, unit: LogUnit) -> Result<f64> {
    check_probability(p)?;
    if p.is_zero() {
        return Err(Error::DivergentSurprise);
    }
    Ok(unit.from_nats(-p.ln()))
}

/// Heaviness `-p log p`: one outcome's contribution to entropy, maximal at
/// `p = 1/e`. Defined as 0 at `p = 0` by continuity.
pub fn heaviness(p: &Rational, unit: LogUnit) -> Result<f64> {
    check_probability(p)?;
    if p.is_zero() || p.is_one() {
        return Ok(0.0);
    }
    Ok(unit.from_nats(-p.to_f64() * p.ln()))
}

pub(crate) fn entropy_nats(probs: &[Rational]) -> f64 {
    kahan_sum(probs.iter().map(|p| {
        if p.is_zero() || p.is_one() {
            0.0
        } else {
            -p.to_f64() * p.ln()
        }
    }))
}

/// Entropy of a distribution: total heaviness, equivalently expected surprise.
pub fn entropy(d: &Distribution, unit: LogUnit) -> f64 {
    unit.from_nats(entropy_nats(d.probs()))
}

/// Expected value of `f` under `d`.
pub fn expected_value(d: &Distribution, f: impl Fn(&str) -> f64) -> f64 {
    kahan_sum(d.iter().map(|(label, p)| p.to_f64() * f(label)))
}

/// `log n`: the entropy of the uniform distribution over `n` outcomes, and
/// the largest entropy any distribution on `n` outcomes can have.
pub fn max_entropy(n: usize, unit: LogUnit) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySupport);
    }
    Ok(unit.from_nats((n as f64).ln()))
}

/// Known information (negentropy): how far the distribution falls short of
/// maximum entropy, `K = log n - S`.
pub fn known_information(d: &Distribution, unit: LogUnit) -> f64 {
    let max = max_entropy(d.len(), LogUnit::Nat).expect("non-empty support");
    unit.from_nats(max - entropy_nats(d.probs()))
}

/// The constant decomposition `I = K + S` of a support's capacity into known
/// and unknown information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCapacity {
    pub known: f64,
    pub entropy: f64,
    pub capacity: f64,
}

/// Split the information capacity `log n` of `d`'s support into known
/// information and entropy.
pub fn information_capacity(d: &Distribution, unit: LogUnit) -> InformationCapacity {
    let s = entropy(d, unit);
    let k = known_information(d, unit);
    let cap = max_entropy(d.len(), unit).expect("non-empty support");
    InformationCapacity {
        known: k,
        entropy: s,
        capacity: cap,
    }
}
