use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::Rational;

/// A probability distribution over labeled outcomes.
///
/// The support is an ordered list of unique labels; probabilities are exact
/// rationals summing to exactly 1. Zero-probability outcomes are allowed and
/// contribute nothing to any measure.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    support: Vec<String>,
    probs: Vec<Rational>,
}

/// Wire form: `{"support": ["a","b"], "probs": ["1/3","2/3"]}`.
#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    support: Vec<String>,
    probs: Vec<Rational>,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;
    fn try_from(repr: DistributionRepr) -> Result<Self> {
        Distribution::new(repr.support, repr.probs)
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr {
            support: d.support,
            probs: d.probs,
        }
    }
}

impl Distribution {
    pub fn new(support: Vec<impl Into<String>>, probs: Vec<Rational>) -> Result<Self> {
        let support: Vec<String> = support.into_iter().map(Into::into).collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if support.len() != probs.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: probs.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for label in &support {
            if !seen.insert(label) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized {
                total: total.to_string(),
            });
        }
        Ok(Distribution { support, probs })
    }

    /// Equal probability `1/n` on each of the given labels.
    pub fn uniform(labels: Vec<impl Into<String>>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySupport);
        }
        let p = Rational::new(1, labels.len() as u64)?;
        let probs = vec![p; labels.len()];
        Distribution::new(labels, probs)
    }

    /// All mass on the outcome at `index`.
    pub fn point_mass(labels: Vec<impl Into<String>>, index: usize) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if index >= labels.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                got: index,
            });
        }
        let probs = (0..labels.len())
            .map(|i| {
                if i == index {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Distribution::new(labels, probs)
    }

    /// Normalize arbitrary nonnegative weights by their exact sum.
    pub fn from_weights(labels: Vec<impl Into<String>>, weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::NotNormalized { total: "0".into() });
        }
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Distribution::new(labels, probs)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn prob(&self, label: &str) -> Option<&Rational> {
        self.support
            .iter()
            .position(|l| l == label)
            .map(|i| &self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.support
            .iter()
            .map(String::as_str)
            .zip(self.probs.iter())
    }

    /// The probability values as a sorted multiset. Two distributions related
    /// by a bijective relabeling compare equal under this view, which is the
    /// exact form of entropy conservation.
    pub fn prob_multiset(&self) -> Vec<Rational> {
        let mut v = self.probs.clone();
        v.sort();
        v
    }
}

impl std::fmt::Debug for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}
