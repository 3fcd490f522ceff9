//! Microstate spaces, partitions into computational states, and the
//! decomposition of physical entropy into computational and
//! non-computational parts.
//!
//! A partition groups the microstates of a finite space into disjoint
//! labeled blocks. Lifting a microstate distribution through a partition
//! sums block probabilities exactly; the resulting computational entropy
//! `H(C)` and the leftover conditional entropy `S(Phi|C)` always add up to
//! the total `S(Phi)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{entropy, Axis, Distribution, DualValue, JointDistribution, LogUnit, Rational};
use crate::FLOAT_TOL;

/// Label automatically assigned to microstates no explicit block covers.
pub const DUMMY_BLOCK: &str = "c0";

/// A finite set of distinguishable microstates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicrostateSpace {
    labels: Vec<String>,
}

impl MicrostateSpace {
    /// Space of `n` microstates with default labels `phi1..phiN`.
    pub fn of_size(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(MicrostateSpace {
            labels: (1..=n).map(|i| format!("phi{i}")).collect(),
        })
    }

    pub fn with_labels(labels: Vec<impl Into<String>>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(MicrostateSpace { labels })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Uniform distribution over the whole space.
    pub fn uniform(&self) -> Distribution {
        Distribution::uniform(self.labels.clone()).expect("space is non-empty")
    }
}

/// A grouping of a microstate space into disjoint labeled computational
/// states. Microstates left uncovered are assigned to the implicit dummy
/// block [`DUMMY_BLOCK`], so every partition totally covers its space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    space: MicrostateSpace,
    blocks: BTreeMap<String, BTreeSet<usize>>,
    block_of: Vec<usize>, // microstate index -> position in block label order
}

impl Partition {
    pub fn new(
        space: MicrostateSpace,
        mut blocks: BTreeMap<String, BTreeSet<usize>>,
    ) -> Result<Self> {
        let n = space.size();
        let mut covered = vec![false; n];
        for (label, members) in &blocks {
            for &i in members {
                if i >= n {
                    return Err(Error::InvalidPartition {
                        detail: format!("block {label:?} references microstate {i} >= {n}"),
                    });
                }
                if covered[i] {
                    return Err(Error::InvalidPartition {
                        detail: format!("microstate {i} belongs to more than one block"),
                    });
                }
                covered[i] = true;
            }
        }
        let uncovered: BTreeSet<usize> =
            (0..n).filter(|&i| !covered[i]).collect();
        if !uncovered.is_empty() {
            if blocks.contains_key(DUMMY_BLOCK) {
                return Err(Error::InvalidPartition {
                    detail: format!(
                        "label {DUMMY_BLOCK:?} is reserved for uncovered microstates"
                    ),
                });
            }
            blocks.insert(DUMMY_BLOCK.to_string(), uncovered);
        }
        let mut block_of = vec![usize::MAX; n];
        for (pos, members) in blocks.values().enumerate() {
            for &i in members {
                block_of[i] = pos;
            }
        }
        Ok(Partition {
            space,
            blocks,
            block_of,
        })
    }

    /// One singleton block per microstate, labeled by the microstate.
    pub fn discrete(space: MicrostateSpace) -> Self {
        let blocks = space
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), BTreeSet::from([i])))
            .collect();
        Partition::new(space, blocks).expect("singleton blocks are disjoint")
    }

    /// A single block containing the whole space.
    pub fn trivial(space: MicrostateSpace, label: impl Into<String>) -> Result<Self> {
        let all: BTreeSet<usize> = (0..space.size()).collect();
        Partition::new(space, BTreeMap::from([(label.into(), all)]))
    }

    pub fn space(&self) -> &MicrostateSpace {
        &self.space
    }

    /// Blocks in label order. Empty blocks are legal and carry zero mass.
    pub fn blocks(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.blocks
    }

    pub fn block_labels(&self) -> Vec<String> {
        self.blocks.keys().cloned().collect()
    }

    /// Label of the block containing microstate `i`.
    pub fn block_label_of(&self, i: usize) -> &str {
        self.blocks
            .keys()
            .nth(self.block_of[i])
            .expect("index covered at construction")
    }

    fn check_space(&self, d: &Distribution) -> Result<()> {
        if d.support() != self.space.labels() {
            return Err(Error::SpaceMismatch {
                detail: format!(
                    "distribution over {:?} does not match partition space {:?}",
                    d.support(),
                    self.space.labels()
                ),
            });
        }
        Ok(())
    }
}

/// Wire form of a partition: `{"space_size": 5, "blocks": {"c1": [0,1]}}`.
/// Optional `"labels"` carries custom microstate names.
#[derive(Serialize, Deserialize)]
pub struct PartitionRepr {
    pub space_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub blocks: BTreeMap<String, BTreeSet<usize>>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;
    fn try_from(r: PartitionRepr) -> Result<Self> {
        let space = match r.labels {
            Some(labels) => {
                if labels.len() != r.space_size {
                    return Err(Error::LengthMismatch {
                        expected: r.space_size,
                        got: labels.len(),
                    });
                }
                MicrostateSpace::with_labels(labels)?
            }
            None => MicrostateSpace::of_size(r.space_size)?,
        };
        Partition::new(space, r.blocks)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            space_size: p.space.size(),
            labels: Some(p.space.labels().to_vec()),
            blocks: p.blocks,
        }
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionRepr::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PartitionRepr::deserialize(d)?;
        Partition::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// Lift a microstate distribution to the computational states: the
/// probability of each block is the exact sum of its members' probabilities.
pub fn lift(d: &Distribution, part: &Partition) -> Result<Distribution> {
    part.check_space(d)?;
    let probs: Vec<Rational> = part
        .blocks()
        .values()
        .map(|members| members.iter().map(|&i| &d.probs()[i]).sum())
        .collect();
    Distribution::new(part.block_labels(), probs)
}

/// The microstate distribution viewed as a joint distribution over
/// (microstate, computational state): cell `(phi_i, c_j)` carries `p_i` when
/// `phi_i` lies in block `c_j` and 0 otherwise.
pub fn joint_of(d: &Distribution, part: &Partition) -> Result<JointDistribution> {
    part.check_space(d)?;
    let block_labels = part.block_labels();
    let cells = (0..part.space().size())
        .map(|i| {
            let block = part.block_label_of(i);
            block_labels
                .iter()
                .map(|c| {
                    if c == block {
                        d.probs()[i].clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    JointDistribution::new(part.space().labels().to_vec(), block_labels, cells)
}

/// The exact decomposition of total physical entropy into a computational
/// part and a non-computational remainder.
#[derive(Debug, Clone, Serialize)]
pub struct FundamentalReport {
    pub total_s: DualValue,
    pub computational_h: DualValue,
    pub noncomputational_s: DualValue,
    pub unit: LogUnit,
    pub residual: f64,
}

impl FundamentalReport {
    pub fn total_s(&self) -> f64 {
        self.total_s.get(self.unit)
    }

    pub fn computational_h(&self) -> f64 {
        self.computational_h.get(self.unit)
    }

    pub fn noncomputational_s(&self) -> f64 {
        self.noncomputational_s.get(self.unit)
    }
}

/// Evaluate `S(Phi) = H(C) + S(Phi|C)` for a microstate distribution and a
/// partition, returning all three entropies.
///
/// Two identities are verified on every call and panic on failure (they are
/// theorems; a violation means broken arithmetic): the decomposition residual
/// stays below tolerance, and `H(C)` equals the mutual information between
/// the microstate and computational variables.
pub fn fundamental_theorem(
    d: &Distribution,
    part: &Partition,
    unit: LogUnit,
) -> Result<FundamentalReport> {
    let total = entropy(d, LogUnit::Nat);
    let lifted = lift(d, part)?;
    let comp = entropy(&lifted, LogUnit::Nat);
    let joint = joint_of(d, part)?;
    let nc = joint.conditional_entropy(Axis::Y, LogUnit::Nat);
    let residual = (total - comp - nc).abs();
    assert!(
        residual < FLOAT_TOL,
        "entropy decomposition residual {residual} exceeds tolerance"
    );
    let mi = joint.mutual_information(LogUnit::Nat);
    assert!(
        (comp - mi).abs() < FLOAT_TOL,
        "H(C)={comp} differs from I(Phi;C)={mi}"
    );
    Ok(FundamentalReport {
        total_s: DualValue::from_nats(total),
        computational_h: DualValue::from_nats(comp),
        noncomputational_s: DualValue::from_nats(nc),
        unit,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn five_state() -> Distribution {
        Distribution::new(
            vec!["phi1", "phi2", "phi3", "phi4", "phi5"],
            ["1/12", "1/4", "1/9", "2/9", "1/3"]
                .iter()
                .map(|s| r(s))
                .collect(),
        )
        .unwrap()
    }

    fn five_state_partition() -> Partition {
        let space = MicrostateSpace::of_size(5).unwrap();
        Partition::new(
            space,
            BTreeMap::from([
                ("c1".to_string(), BTreeSet::from([0, 1])),
                ("c2".to_string(), BTreeSet::from([2, 3, 4])),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn lift_sums_blocks_exactly() {
        let lifted = lift(&five_state(), &five_state_partition()).unwrap();
        assert_eq!(lifted.support(), &["c1", "c2"]);
        assert_eq!(lifted.probs(), &[r("1/3"), r("2/3")]);
    }

    #[test]
    fn lift_through_singletons_is_identity() {
        let d = five_state();
        let part = Partition::discrete(MicrostateSpace::of_size(5).unwrap());
        let lifted = lift(&d, &part).unwrap();
        // singleton blocks are labeled by microstate, so probabilities match
        for (label, p) in d.iter() {
            assert_eq!(lifted.prob(label), Some(p));
        }
    }

    #[test]
    fn lift_through_single_block_is_point_mass() {
        let d = five_state();
        let part = Partition::trivial(MicrostateSpace::of_size(5).unwrap(), "all").unwrap();
        let lifted = lift(&d, &part).unwrap();
        assert_eq!(lifted.probs(), &[r("1")]);
    }

    #[test]
    fn lift_rejects_space_mismatch() {
        let d = Distribution::uniform(vec!["a", "b"]).unwrap();
        let res = lift(&d, &five_state_partition());
        assert!(matches!(res, Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn uncovered_microstates_get_dummy_block() {
        let space = MicrostateSpace::of_size(3).unwrap();
        let part = Partition::new(
            space,
            BTreeMap::from([("c1".to_string(), BTreeSet::from([0]))]),
        )
        .unwrap();
        assert_eq!(part.block_labels(), vec!["c0", "c1"]);
        assert_eq!(part.block_label_of(2), "c0");
    }

    #[test]
    fn dummy_label_is_reserved() {
        let space = MicrostateSpace::of_size(3).unwrap();
        let res = Partition::new(
            space,
            BTreeMap::from([("c0".to_string(), BTreeSet::from([0]))]),
        );
        assert!(matches!(res, Err(Error::InvalidPartition { .. })));
    }

    #[test]
    fn overlapping_blocks_rejected() {
        let space = MicrostateSpace::of_size(3).unwrap();
        let res = Partition::new(
            space,
            BTreeMap::from([
                ("a".to_string(), BTreeSet::from([0, 1])),
                ("b".to_string(), BTreeSet::from([1, 2])),
            ]),
        );
        assert!(matches!(res, Err(Error::InvalidPartition { .. })));
    }

    #[test]
    fn joint_reproduces_both_marginals() {
        let d = five_state();
        let part = five_state_partition();
        let joint = joint_of(&d, &part).unwrap();
        assert_eq!(joint.marginal(Axis::X), d);
        assert_eq!(joint.marginal(Axis::Y), lift(&d, &part).unwrap());
        // column sums are the block masses
        let m = joint.marginal(Axis::Y);
        assert_eq!(m.probs(), &[r("1/3"), r("2/3")]);
    }

    #[test]
    fn point_mass_joint_is_point_mass() {
        let d = Distribution::point_mass(vec!["phi1", "phi2"], 0).unwrap();
        let space = MicrostateSpace::with_labels(vec!["phi1", "phi2"]).unwrap();
        let part = Partition::discrete(space);
        let joint = joint_of(&d, &part).unwrap();
        assert_eq!(joint.entropy(LogUnit::Nat), 0.0);
    }

    #[test]
    fn uniform_over_equal_blocks_lifts_uniform() {
        let space = MicrostateSpace::of_size(6).unwrap();
        let d = space.uniform();
        let part = Partition::new(
            space,
            BTreeMap::from([
                ("c1".to_string(), BTreeSet::from([0, 1, 2])),
                ("c2".to_string(), BTreeSet::from([3, 4, 5])),
            ]),
        )
        .unwrap();
        let lifted = lift(&d, &part).unwrap();
        assert_eq!(lifted.probs(), &[r("1/2"), r("1/2")]);
    }

    #[test]
    fn decomposition_matches_independent_oracles() {
        // Oracle: each entropy summed directly from f64 fractions.
        let h = |ps: &[f64]| -> f64 { ps.iter().map(|&p| -p * p.ln()).sum() };
        let total = h(&[1.0 / 12.0, 0.25, 1.0 / 9.0, 2.0 / 9.0, 1.0 / 3.0]);
        let comp = h(&[1.0 / 3.0, 2.0 / 3.0]);
        let nc = total - comp;
        assert!((total - 1.4982287263059835).abs() < 1e-9);
        assert!((comp - 0.6365141682948128).abs() < 1e-9);
        assert!((nc - 0.8617145580111707).abs() < 1e-9);

        let report =
            fundamental_theorem(&five_state(), &five_state_partition(), LogUnit::Nat).unwrap();
        assert!((report.total_s() - total).abs() < FLOAT_TOL);
        assert!((report.computational_h() - comp).abs() < FLOAT_TOL);
        assert!((report.noncomputational_s() - nc).abs() < 1e-9);
        assert!(report.residual < FLOAT_TOL);
    }

    #[test]
    fn singleton_partition_puts_everything_computational() {
        let d = five_state();
        let part = Partition::discrete(MicrostateSpace::of_size(5).unwrap());
        let report = fundamental_theorem(&d, &part, LogUnit::Nat).unwrap();
        assert!((report.computational_h() - report.total_s()).abs() < FLOAT_TOL);
        assert!(report.noncomputational_s().abs() < FLOAT_TOL);
    }

    #[test]
    fn trivial_partition_puts_everything_noncomputational() {
        let d = five_state();
        let part = Partition::trivial(MicrostateSpace::of_size(5).unwrap(), "all").unwrap();
        let report = fundamental_theorem(&d, &part, LogUnit::Nat).unwrap();
        assert!(report.computational_h().abs() < FLOAT_TOL);
        assert!((report.noncomputational_s() - report.total_s()).abs() < FLOAT_TOL);
    }

    #[test]
    fn partition_json_round_trip() {
        let part = five_state_partition();
        let json = serde_json::to_string(&part).unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, part);
        // the documented minimal form parses too
        let minimal: Partition = serde_json::from_str(
            r#"{"space_size": 5, "blocks": {"c1": [0,1], "c2": [2,3,4]}}"#,
        )
        .unwrap();
        assert_eq!(minimal, part);
    }
}
