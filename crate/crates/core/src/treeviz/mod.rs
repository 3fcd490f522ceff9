//! Heaviness trees: a distribution drawn as branches whose width is
//! probability, length is surprise, and area is heaviness.
//!
//! Grouping leaves under trunk branches splits every branch into a trunk
//! segment (the group's surprise) and a stem segment (the conditional
//! surprise within the group). Lengths add because the logarithm of a
//! product is a sum, widths add because probabilities of disjoint events
//! add, and therefore total area is conserved: the trunk layer's area is the
//! computational entropy and the stem layer's area is the conditional
//! remainder.

mod svg;
mod table;

pub use svg::{render_svg, Orientation, SvgOptions};
pub use table::render_table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{surprise, Distribution, LogUnit, Rational};
use crate::statespace::Partition;

/// What to do with zero-probability outcomes when building a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPolicy {
    /// Drop them: zero area, infinite depth, nothing to draw.
    #[default]
    Omit,
    /// Reject the distribution.
    Error,
}

/// One full-height branch: an outcome drawn at its surprise depth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafBranch {
    pub label: String,
    pub prob: Rational,
    /// Surprise of the outcome, in the tree's unit.
    pub depth: f64,
}

/// A stem: the upper part of a leaf branch after grouping. Its width is
/// still the leaf's unconditional probability; its length is the surprise of
/// the leaf *given* its group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StemBranch {
    pub leaf_label: String,
    pub width: Rational,
    pub conditional: Rational,
    pub length: f64,
}

/// A trunk: the merged lower part of a group of branches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrunkBranch {
    pub label: String,
    pub prob: Rational,
    pub length: f64,
    pub stems: Vec<StemBranch>,
}

/// A heaviness tree, optionally grouped into trunks and stems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeavinessTree {
    pub unit: LogUnit,
    pub leaves: Vec<LeafBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunks: Option<Vec<TrunkBranch>>,
}

impl HeavinessTree {
    /// Sum of width x length over the leaf branches.
    pub fn leaf_area(&self) -> f64 {
        self.leaves
            .iter()
            .map(|l| l.prob.to_f64() * l.depth)
            .sum()
    }

    /// Trunk-layer area: the entropy of the grouped variable.
    pub fn trunk_area(&self) -> f64 {
        self.trunks
            .as_ref()
            .map(|ts| ts.iter().map(|t| t.prob.to_f64() * t.length).sum())
            .unwrap_or(0.0)
    }

    /// Stem-layer area: the conditional entropy within groups.
    pub fn stem_area(&self) -> f64 {
        self.trunks
            .as_ref()
            .map(|ts| {
                ts.iter()
                    .flat_map(|t| &t.stems)
                    .map(|s| s.width.to_f64() * s.length)
                    .sum()
            })
            .unwrap_or(0.0)
    }

    /// Total drawn area: equal to the distribution's entropy whether or not
    /// the tree is grouped.
    pub fn total_area(&self) -> f64 {
        if self.trunks.is_some() {
            self.trunk_area() + self.stem_area()
        } else {
            self.leaf_area()
        }
    }
}

/// Build the ungrouped tree of a distribution: one branch per outcome at
/// depth `surprise(p)`.
pub fn build_tree(d: &Distribution, unit: LogUnit) -> Result<HeavinessTree> {
    build_tree_with(d, unit, ZeroPolicy::Omit)
}

pub fn build_tree_with(
    d: &Distribution,
    unit: LogUnit,
    zeros: ZeroPolicy,
) -> Result<HeavinessTree> {
    let mut leaves = Vec::with_capacity(d.len());
    for (label, p) in d.iter() {
        if p.is_zero() {
            match zeros {
                ZeroPolicy::Omit => continue,
                ZeroPolicy::Error => {
                    return Err(Error::ZeroBranch {
                        label: label.to_string(),
                    })
                }
            }
        }
        leaves.push(LeafBranch {
            label: label.to_string(),
            prob: p.clone(),
            depth: surprise(p, unit)?,
        });
    }
    Ok(HeavinessTree {
        unit,
        leaves,
        trunks: None,
    })
}

/// Group a tree's leaves under trunk branches.
///
/// The partition must be over a space whose labels are exactly the tree's
/// leaf labels. Trunks carry the exact block masses; stems carry the exact
/// conditional probabilities, so depth (trunk + stem = leaf) and total area
/// are conserved.
pub fn group_tree(t: &HeavinessTree, part: &Partition) -> Result<HeavinessTree> {
    let leaf_labels: Vec<&str> = t.leaves.iter().map(|l| l.label.as_str()).collect();
    let space_labels: Vec<&str> =
        part.space().labels().iter().map(String::as_str).collect();
    if leaf_labels != space_labels {
        return Err(Error::PartitionMismatch {
            detail: format!(
                "partition space {space_labels:?} does not cover the leaf labels {leaf_labels:?}"
            ),
        });
    }
    let mut trunks = Vec::new();
    for (label, members) in part.blocks() {
        if members.is_empty() {
            continue; // zero width, nothing to draw
        }
        let prob: Rational = members.iter().map(|&i| &t.leaves[i].prob).sum();
        let length = if prob.is_one() {
            0.0
        } else {
            surprise(&prob, t.unit)?
        };
        let stems = members
            .iter()
            .map(|&i| {
                let leaf = &t.leaves[i];
                let conditional = &leaf.prob / &prob;
                Ok(StemBranch {
                    leaf_label: leaf.label.clone(),
                    width: leaf.prob.clone(),
                    length: surprise(&conditional, t.unit)?,
                    conditional,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        trunks.push(TrunkBranch {
            label: label.clone(),
            prob,
            length,
            stems,
        });
    }
    Ok(HeavinessTree {
        unit: t.unit,
        leaves: t.leaves.clone(),
        trunks: Some(trunks),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infomath::entropy;
    use crate::statespace::MicrostateSpace;
    use crate::FLOAT_TOL;
    use std::collections::{BTreeMap, BTreeSet};

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
        let space =
            MicrostateSpace::with_labels(vec!["phi1", "phi2", "phi3", "phi4", "phi5"]).unwrap();
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
    fn uniform_pair_gives_two_unit_leaves() {
        let d = Distribution::uniform(vec!["a", "b"]).unwrap();
        let t = build_tree(&d, LogUnit::Bit).unwrap();
        assert_eq!(t.leaves.len(), 2);
        for leaf in &t.leaves {
            assert!((leaf.depth - 1.0).abs() < FLOAT_TOL);
        }
        assert!((t.total_area() - 1.0).abs() < FLOAT_TOL);
    }

    #[test]
    fn five_state_leaf_depths_are_surprises() {
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let expected = [12.0f64, 4.0, 9.0, 4.5, 3.0];
        for (leaf, m) in t.leaves.iter().zip(expected) {
            assert!((leaf.depth - m.ln()).abs() < FLOAT_TOL);
        }
        assert!((t.total_area() - entropy(&five_state(), LogUnit::Nat)).abs() < FLOAT_TOL);
        assert!((t.total_area() - 1.4982287263059835).abs() < 1e-9);
    }

    #[test]
    fn point_mass_tree_is_a_single_zero_leaf() {
        let d = Distribution::point_mass(vec!["a"], 0).unwrap();
        let t = build_tree(&d, LogUnit::Nat).unwrap();
        assert_eq!(t.leaves.len(), 1);
        assert_eq!(t.leaves[0].depth, 0.0);
        assert_eq!(t.total_area(), 0.0);
    }

    #[test]
    fn zero_probability_leaves_omitted_or_rejected() {
        let d = Distribution::new(vec!["a", "b", "c"], vec![r("1/2"), r("1/2"), r("0")])
            .unwrap();
        let t = build_tree(&d, LogUnit::Bit).unwrap();
        assert_eq!(t.leaves.len(), 2);
        let err = build_tree_with(&d, LogUnit::Bit, ZeroPolicy::Error);
        assert!(matches!(err, Err(Error::ZeroBranch { .. })));
    }

    #[test]
    fn grouping_conserves_area_and_splits_it_correctly() {
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let g = group_tree(&t, &five_state_partition()).unwrap();
        // oracle: the entropy decomposition computed independently
        let report = crate::statespace::fundamental_theorem(
            &five_state(),
            &five_state_partition(),
            LogUnit::Nat,
        )
        .unwrap();
        assert!((g.trunk_area() - report.computational_h()).abs() < FLOAT_TOL);
        assert!((g.stem_area() - report.noncomputational_s()).abs() < FLOAT_TOL);
        assert!((g.total_area() - t.total_area()).abs() < FLOAT_TOL);
    }

    #[test]
    fn grouping_conserves_every_leaf_depth() {
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let g = group_tree(&t, &five_state_partition()).unwrap();
        for trunk in g.trunks.as_ref().unwrap() {
            for stem in &trunk.stems {
                let leaf = t
                    .leaves
                    .iter()
                    .find(|l| l.label == stem.leaf_label)
                    .unwrap();
                assert!((trunk.length + stem.length - leaf.depth).abs() < FLOAT_TOL);
            }
        }
    }

    #[test]
    fn trunk_width_is_exact_sum_of_member_widths() {
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let g = group_tree(&t, &five_state_partition()).unwrap();
        let trunks = g.trunks.as_ref().unwrap();
        assert_eq!(trunks[0].prob, r("1/3"));
        assert_eq!(trunks[1].prob, r("2/3"));
        for trunk in trunks {
            let width_sum: Rational = trunk.stems.iter().map(|s| &s.width).sum();
            assert_eq!(width_sum, trunk.prob);
        }
    }

    #[test]
    fn singleton_grouping_has_zero_stems() {
        let space =
            MicrostateSpace::with_labels(vec!["phi1", "phi2", "phi3", "phi4", "phi5"]).unwrap();
        let part = Partition::discrete(space);
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let g = group_tree(&t, &part).unwrap();
        for trunk in g.trunks.as_ref().unwrap() {
            for stem in &trunk.stems {
                assert_eq!(stem.length, 0.0);
            }
        }
        assert!((g.trunk_area() - t.total_area()).abs() < FLOAT_TOL);
        assert!(g.stem_area().abs() < FLOAT_TOL);
    }

    #[test]
    fn one_block_grouping_has_zero_trunk() {
        let space =
            MicrostateSpace::with_labels(vec!["phi1", "phi2", "phi3", "phi4", "phi5"]).unwrap();
        let part = Partition::trivial(space, "all").unwrap();
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let g = group_tree(&t, &part).unwrap();
        let trunks = g.trunks.as_ref().unwrap();
        assert_eq!(trunks.len(), 1);
        assert!(trunks[0].prob.is_one());
        assert_eq!(trunks[0].length, 0.0);
        assert!(g.trunk_area().abs() < FLOAT_TOL);
        assert!((g.stem_area() - t.total_area()).abs() < FLOAT_TOL);
    }

    #[test]
    fn grouping_rejects_mismatched_partition() {
        let t = build_tree(&five_state(), LogUnit::Nat).unwrap();
        let space = MicrostateSpace::with_labels(vec!["x", "y"]).unwrap();
        let part = Partition::trivial(space, "all").unwrap();
        assert!(matches!(
            group_tree(&t, &part),
            Err(Error::PartitionMismatch { .. })
        ));
    }
}
