//! Bijective microstate dynamics and the entropy laws it forces.
//!
//! A permutation moves probability without merging it, so entropy is exactly
//! conserved. An ensemble of permutations (uncertainty about which dynamics
//! will act) mixes probabilities and can only raise entropy. A lossy map
//! merges states and necessarily lowers entropy whenever two merged sources
//! both carry mass; it exists here to demonstrate why bijectivity is the
//! load-bearing assumption.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{entropy, Distribution, LogUnit, Rational};

/// A total bijection on microstate slots `0..n-1`. `map[i] = j` sends the
/// probability at slot `i` to slot `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PermRepr", into = "PermRepr")]
pub struct Permutation {
    map: Vec<usize>,
}

/// Wire form: `{"map": [2,0,1]}`.
#[derive(Serialize, Deserialize)]
struct PermRepr {
    map: Vec<usize>,
}

impl TryFrom<PermRepr> for Permutation {
    type Error = Error;
    fn try_from(r: PermRepr) -> Result<Self> {
        Permutation::new(r.map)
    }
}

impl From<Permutation> for PermRepr {
    fn from(p: Permutation) -> Self {
        PermRepr { map: p.map }
    }
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::InvalidPermutation {
                detail: "empty mapping".into(),
            });
        }
        let mut seen = vec![false; n];
        for &target in &map {
            if target >= n {
                return Err(Error::InvalidPermutation {
                    detail: format!("target {target} out of range for size {n}"),
                });
            }
            if seen[target] {
                return Err(Error::InvalidPermutation {
                    detail: format!("target {target} appears twice"),
                });
            }
            seen[target] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Permutation::new((0..n).collect())
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Image of slot `i`.
    pub fn apply_index(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    /// Function composition `self . other`: `other` acts first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        let map = (0..other.size()).map(|i| self.map[other.map[i]]).collect();
        Ok(Permutation { map })
    }

    /// Push a distribution forward: the probability of each target slot is
    /// exactly the probability of the slot it came from, so the probability
    /// multiset (and hence the entropy) is unchanged.
    pub fn apply(&self, d: &Distribution) -> Result<Distribution> {
        if d.len() != self.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: d.len(),
            });
        }
        let mut probs = vec![Rational::zero(); d.len()];
        for (i, p) in d.probs().iter().enumerate() {
            probs[self.map[i]] = p.clone();
        }
        Distribution::new(d.support().to_vec(), probs)
    }
}

/// A statistical mixture over possible bijective dynamics: weighted
/// permutations over the same space, weights summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct DynamicsEnsemble {
    branches: Vec<(Rational, Permutation)>,
}

/// Wire form: `{"branches": [{"w": "1/2", "map": [0,1,2,3]}, ...]}`.
#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    branches: Vec<BranchRepr>,
}

#[derive(Serialize, Deserialize)]
struct BranchRepr {
    w: Rational,
    map: Vec<usize>,
}

impl TryFrom<EnsembleRepr> for DynamicsEnsemble {
    type Error = Error;
    fn try_from(r: EnsembleRepr) -> Result<Self> {
        let branches = r
            .branches
            .into_iter()
            .map(|b| Ok((b.w, Permutation::new(b.map)?)))
            .collect::<Result<Vec<_>>>()?;
        DynamicsEnsemble::new(branches)
    }
}

impl From<DynamicsEnsemble> for EnsembleRepr {
    fn from(e: DynamicsEnsemble) -> Self {
        EnsembleRepr {
            branches: e
                .branches
                .into_iter()
                .map(|(w, p)| BranchRepr { w, map: p.map })
                .collect(),
        }
    }
}

impl DynamicsEnsemble {
    pub fn new(branches: Vec<(Rational, Permutation)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::EmptySupport);
        }
        let n = branches[0].1.size();
        for (_, p) in &branches {
            if p.size() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: p.size(),
                });
            }
        }
        let total: Rational = branches.iter().map(|(w, _)| w).sum();
        if !total.is_one() {
            return Err(Error::NotNormalized {
                total: total.to_string(),
            });
        }
        Ok(DynamicsEnsemble { branches })
    }

    pub fn branches(&self) -> &[(Rational, Permutation)] {
        &self.branches
    }

    pub fn size(&self) -> usize {
        self.branches[0].1.size()
    }

    /// Exact mixture of the branch images: `sum_b w_b * perm_b(d)`.
    pub fn apply(&self, d: &Distribution) -> Result<Distribution> {
        if d.len() != self.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: d.len(),
            });
        }
        let mut probs = vec![Rational::zero(); d.len()];
        for (w, perm) in &self.branches {
            for (i, p) in d.probs().iter().enumerate() {
                probs[perm.map[i]] += w * p;
            }
        }
        Distribution::new(d.support().to_vec(), probs)
    }
}

/// A total but not necessarily injective map on slots. Applying it can merge
/// probability mass, which is exactly what bijective physics never does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossyMap {
    map: Vec<usize>,
}

impl LossyMap {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::EmptySupport);
        }
        for &target in &map {
            if target >= n {
                return Err(Error::InvalidPermutation {
                    detail: format!("target {target} out of range for size {n}"),
                });
            }
        }
        Ok(LossyMap { map })
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    /// Push a distribution forward, adding merged probabilities exactly, and
    /// report the entropy change (negative whenever two merged sources both
    /// had nonzero probability, by concavity of heaviness).
    pub fn apply(&self, d: &Distribution, unit: LogUnit) -> Result<(Distribution, f64)> {
        if d.len() != self.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: d.len(),
            });
        }
        let before = entropy(d, unit);
        let mut probs = vec![Rational::zero(); d.len()];
        for (i, p) in d.probs().iter().enumerate() {
            probs[self.map[i]] += p;
        }
        let out = Distribution::new(d.support().to_vec(), probs)?;
        let delta = entropy(&out, unit) - before;
        Ok((out, delta))
    }
}

/// The four-slot two-branch shift ensemble: a three-outcome distribution
/// placed on slots 0..2 either stays (weight 1/2) or shifts to slots 1..3
/// (weight 1/2). The minimal construction where ignorance of which of two
/// injections acts strictly raises entropy.
pub fn shift_pair_ensemble() -> DynamicsEnsemble {
    let stay = Permutation::identity(4).expect("size 4");
    let shift = Permutation::new(vec![1, 2, 3, 0]).expect("4-cycle");
    let half = Rational::new(1, 2).expect("1/2");
    DynamicsEnsemble::new(vec![(half.clone(), stay), (half, shift)])
        .expect("weights sum to 1")
}
