//! Compiling computational operations down to bijective microphysics.
//!
//! Any operation whose rows are rational distributions can be realized
//! exactly: give every input state a block of `M` equally likely microstates
//! (`M` = lcm of the row denominators), route an integer count
//! `M * P_i(c_j)` of them into each output block, and let a permutation do
//! the routing. Pushing a uniform block through the permutation and lifting
//! by the output partition recovers the original rows exactly, and the
//! microstate-level entropy bookkeeping exposes how much entropy the
//! operation moves between the computational and non-computational ledgers.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::Permutation;
use crate::error::{Error, Result};
use crate::infomath::{entropy, Axis, Distribution, LogUnit, Rational};
use crate::statespace::{joint_of, lift, MicrostateSpace, Partition};
use crate::FLOAT_TOL;

/// A (possibly stochastic) computational operation: for every input state, a
/// rational probability distribution over output states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CompOperationRepr", into = "CompOperationRepr")]
pub struct CompOperation {
    states_in: Vec<String>,
    states_out: Vec<String>,
    rows: Vec<Distribution>, // parallel to states_in, each over states_out
}

/// Wire form:
/// `{"in": ["0","1"], "out": ["0"], "rows": {"0": {"0": "1"}, "1": {"0": "1"}}}`
/// Absent cells are zero.
#[derive(Serialize, Deserialize)]
struct CompOperationRepr {
    #[serde(rename = "in")]
    states_in: Vec<String>,
    #[serde(rename = "out")]
    states_out: Vec<String>,
    rows: BTreeMap<String, BTreeMap<String, Rational>>,
}

impl TryFrom<CompOperationRepr> for CompOperation {
    type Error = Error;
    fn try_from(r: CompOperationRepr) -> Result<Self> {
        let mut rows = Vec::with_capacity(r.states_in.len());
        for input in &r.states_in {
            let cells = r.rows.get(input).ok_or_else(|| Error::InvalidOperation {
                detail: format!("missing row for input state {input:?}"),
            })?;
            for label in cells.keys() {
                if !r.states_out.contains(label) {
                    return Err(Error::InvalidOperation {
                        detail: format!("row {input:?} references unknown output {label:?}"),
                    });
                }
            }
            let probs = r
                .states_out
                .iter()
                .map(|out| cells.get(out).cloned().unwrap_or_else(Rational::zero))
                .collect();
            rows.push(Distribution::new(r.states_out.clone(), probs)?);
        }
        if r.rows.len() != r.states_in.len() {
            return Err(Error::InvalidOperation {
                detail: "rows for unknown input states present".into(),
            });
        }
        CompOperation::new(r.states_in, r.states_out, rows)
    }
}

impl From<CompOperation> for CompOperationRepr {
    fn from(op: CompOperation) -> Self {
        let rows = op
            .states_in
            .iter()
            .zip(&op.rows)
            .map(|(input, row)| {
                let cells = row
                    .iter()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(l, p)| (l.to_string(), p.clone()))
                    .collect();
                (input.clone(), cells)
            })
            .collect();
        CompOperationRepr {
            states_in: op.states_in,
            states_out: op.states_out,
            rows,
        }
    }
}

impl CompOperation {
    pub fn new(
        states_in: Vec<impl Into<String>>,
        states_out: Vec<impl Into<String>>,
        rows: Vec<Distribution>,
    ) -> Result<Self> {
        let states_in: Vec<String> = states_in.into_iter().map(Into::into).collect();
        let states_out: Vec<String> = states_out.into_iter().map(Into::into).collect();
        if states_in.is_empty() || states_out.is_empty() {
            return Err(Error::EmptySupport);
        }
        for labels in [&states_in, &states_out] {
            let mut seen = BTreeSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(Error::DuplicateLabel { label: l.clone() });
                }
            }
        }
        if rows.len() != states_in.len() {
            return Err(Error::LengthMismatch {
                expected: states_in.len(),
                got: rows.len(),
            });
        }
        for row in &rows {
            if row.support() != states_out {
                return Err(Error::InvalidOperation {
                    detail: format!(
                        "row support {:?} does not match output states {:?}",
                        row.support(),
                        states_out
                    ),
                });
            }
        }
        Ok(CompOperation {
            states_in,
            states_out,
            rows,
        })
    }

    pub fn states_in(&self) -> &[String] {
        &self.states_in
    }

    pub fn states_out(&self) -> &[String] {
        &self.states_out
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, input: &str) -> Option<&Distribution> {
        self.states_in
            .iter()
            .position(|s| s == input)
            .map(|i| &self.rows[i])
    }

    /// Reset-to-zero: both bit values map to `"0"` with certainty.
    pub fn erase() -> Self {
        let row = |_: &str| {
            Distribution::new(vec!["0"], vec![Rational::one()]).expect("point mass")
        };
        CompOperation::new(vec!["0", "1"], vec!["0"], vec![row("0"), row("1")])
            .expect("valid erase")
    }

    /// Bit flip.
    pub fn not_gate() -> Self {
        let rows = vec![
            Distribution::point_mass(vec!["0", "1"], 1).expect("point mass"),
            Distribution::point_mass(vec!["0", "1"], 0).expect("point mass"),
        ];
        CompOperation::new(vec!["0", "1"], vec!["0", "1"], rows).expect("valid not")
    }

    /// Identity on the given states.
    pub fn identity(states: Vec<impl Into<String>>) -> Result<Self> {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let rows = (0..states.len())
            .map(|i| Distribution::point_mass(states.clone(), i))
            .collect::<Result<Vec<_>>>()?;
        CompOperation::new(states.clone(), states, rows)
    }

    /// Both inputs go to `1` with probability `bias`, else to `0`.
    pub fn coin_flip(bias: Rational) -> Result<Self> {
        let p0 = Rational::one()
            .checked_sub(&bias)
            .ok_or_else(|| Error::InvalidProbability {
                value: bias.to_string(),
            })?;
        let row = Distribution::new(vec!["0", "1"], vec![p0, bias])?;
        CompOperation::new(vec!["0", "1"], vec!["0", "1"], vec![row.clone(), row])
    }

    /// Column-stochastic composition: perform `self`, then `after`.
    pub fn compose(&self, after: &CompOperation) -> Result<CompOperation> {
        if self.states_out != after.states_in {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "output states {:?} do not match next input states {:?}",
                    self.states_out, after.states_in
                ),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let probs: Vec<Rational> = (0..after.states_out.len())
                    .map(|k| {
                        row.probs()
                            .iter()
                            .zip(&after.rows)
                            .map(|(a, next_row)| a * &next_row.probs()[k])
                            .sum()
                    })
                    .collect();
                Distribution::new(after.states_out.clone(), probs)
            })
            .collect::<Result<Vec<_>>>()?;
        CompOperation::new(self.states_in.clone(), after.states_out.clone(), rows)
    }

    /// Final-state distribution induced by an initial distribution:
    /// `P_F(c_j) = sum_i P_I(c_i) * P_i(c_j)`, all exact.
    pub fn push_prior(&self, prior: &Distribution) -> Result<Distribution> {
        if prior.support() != self.states_in {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "prior over {:?} does not match input states {:?}",
                    prior.support(),
                    self.states_in
                ),
            });
        }
        let probs: Vec<Rational> = (0..self.states_out.len())
            .map(|j| {
                prior
                    .probs()
                    .iter()
                    .zip(&self.rows)
                    .map(|(pi, row)| pi * &row.probs()[j])
                    .sum()
            })
            .collect();
        Distribution::new(self.states_out.clone(), probs)
    }
}

/// Determinism and reversibility flags of an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpClass {
    /// Every row is a point mass (zero row entropy).
    pub deterministic: bool,
    /// No output state can be reached from two distinct input states.
    pub reversible: bool,
}

/// Classify by direct scan of the rows.
pub fn classify(op: &CompOperation) -> OpClass {
    let deterministic = op
        .rows()
        .iter()
        .all(|row| row.probs().iter().any(|p| p.is_one()));
    let reversible = (0..op.states_out().len()).all(|j| {
        op.rows()
            .iter()
            .filter(|row| !row.probs()[j].is_zero())
            .count()
            <= 1
    });
    OpClass {
        deterministic,
        reversible,
    }
}

/// Microstate sizing that makes every routed count an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicrostateBudget {
    /// Microstates per input block: the lcm of all row denominators.
    pub per_block: BigUint,
    /// Total microstates: `per_block * |states_in|`.
    pub total: BigUint,
}

/// Smallest per-block size `M` such that every `M * P_i(c_j)` is an integer.
pub fn microstate_budget(op: &CompOperation) -> MicrostateBudget {
    let mut m = BigUint::one();
    for row in op.rows() {
        for p in row.probs() {
            m = m.lcm(p.denom());
        }
    }
    let total = &m * BigUint::from(op.states_in().len());
    MicrostateBudget {
        per_block: m,
        total,
    }
}

/// A computational operation realized as bijective microstate dynamics:
/// equal-size input blocks, output blocks sized by the routed counts, and a
/// total permutation carrying exactly `|c_i| * P_i(c_j)` microstates from
/// input block `i` into output block `j`.
#[derive(Debug, Clone)]
pub struct Realization {
    space: MicrostateSpace,
    partition_in: Partition,
    partition_out: Partition,
    perm: Permutation,
    counts: Vec<Vec<u64>>, // counts[i][j] = |Phi_i^j|
    states_in: Vec<String>,
    states_out: Vec<String>,
    block_size: u64,
}

impl Realization {
    pub fn space_size(&self) -> usize {
        self.space.size()
    }

    pub fn space(&self) -> &MicrostateSpace {
        &self.space
    }

    pub fn partition_in(&self) -> &Partition {
        &self.partition_in
    }

    pub fn partition_out(&self) -> &Partition {
        &self.partition_out
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Microstates per input block (`scale * M`).
    pub fn block_size(&self) -> u64 {
        self.block_size
    }

    pub fn states_in(&self) -> &[String] {
        &self.states_in
    }

    pub fn states_out(&self) -> &[String] {
        &self.states_out
    }

    /// `|Phi_i^j|`: how many microstates of input block `i` land in output
    /// block `j`.
    pub fn count(&self, input: &str, output: &str) -> Option<u64> {
        let i = self.states_in.iter().position(|s| s == input)?;
        let j = self.states_out.iter().position(|s| s == output)?;
        Some(self.counts[i][j])
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Counts keyed by state labels, for serialization.
    pub fn count_map(&self) -> BTreeMap<String, BTreeMap<String, u64>> {
        self.states_in
            .iter()
            .enumerate()
            .map(|(i, input)| {
                let inner = self
                    .states_out
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| self.counts[i][j] > 0)
                    .map(|(j, out)| (out.clone(), self.counts[i][j]))
                    .collect();
                (input.clone(), inner)
            })
            .collect()
    }
}

/// Build the bijective realization of `op` with every input block inflated
/// by `scale`. Block sizes, counts and the permutation are all exact; the
/// construction is deterministic (lowest-index-first routing).
pub fn realize(op: &CompOperation, scale: u64) -> Result<Realization> {
    if scale == 0 {
        return Err(Error::InvalidOperation {
            detail: "scale must be positive".into(),
        });
    }
    let budget = microstate_budget(op);
    let block_size_big = &budget.per_block * BigUint::from(scale);
    let n_big = &block_size_big * BigUint::from(op.states_in().len());
    let n = n_big.to_usize().ok_or_else(|| Error::BudgetTooLarge {
        requested: n_big.to_string(),
    })?;
    let block_size = block_size_big
        .to_u64()
        .ok_or_else(|| Error::BudgetTooLarge {
            requested: block_size_big.to_string(),
        })?;

    // counts[i][j] = block_size * P_i(c_j), integral by choice of M
    let counts: Vec<Vec<u64>> = op
        .rows()
        .iter()
        .map(|row| {
            row.probs()
                .iter()
                .map(|p| {
                    let scaled = &block_size_big * p.numer();
                    let (q, rem) = scaled.div_rem(p.denom());
                    debug_assert!(rem.is_zero(), "lcm budget divides every denominator");
                    q.to_u64().expect("count bounded by block size")
                })
                .collect()
        })
        .collect();

    let n_in = op.states_in().len();
    let n_out = op.states_out().len();
    let out_sizes: Vec<u64> = (0..n_out)
        .map(|j| (0..n_in).map(|i| counts[i][j]).sum())
        .collect();
    let mut out_offsets = Vec::with_capacity(n_out);
    let mut acc = 0u64;
    for &size in &out_sizes {
        out_offsets.push(acc);
        acc += size;
    }
    debug_assert_eq!(acc as usize, n, "total microstates conserved");

    // Route the lowest-index microstates of each input block to the next
    // free slots of each output block, in declaration order.
    let mut perm_map = vec![0usize; n];
    let mut next_free: Vec<u64> = out_offsets.clone();
    for i in 0..n_in {
        let mut src = i as u64 * block_size;
        for j in 0..n_out {
            for _ in 0..counts[i][j] {
                perm_map[src as usize] = next_free[j] as usize;
                src += 1;
                next_free[j] += 1;
            }
        }
    }
    let perm = Permutation::new(perm_map)?;

    let space = MicrostateSpace::of_size(n)?;
    let in_blocks: BTreeMap<String, BTreeSet<usize>> = op
        .states_in()
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let start = i * block_size as usize;
            (label.clone(), (start..start + block_size as usize).collect())
        })
        .collect();
    let out_blocks: BTreeMap<String, BTreeSet<usize>> = op
        .states_out()
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let start = out_offsets[j] as usize;
            (label.clone(), (start..start + out_sizes[j] as usize).collect())
        })
        .collect();
    let partition_in = Partition::new(space.clone(), in_blocks)?;
    let partition_out = Partition::new(space.clone(), out_blocks)?;

    Ok(Realization {
        space,
        partition_in,
        partition_out,
        perm,
        counts,
        states_in: op.states_in().to_vec(),
        states_out: op.states_out().to_vec(),
        block_size,
    })
}

/// Recover the computational operation a realization implements: place the
/// uniform distribution on each input block, push it through the
/// permutation, and lift by the output partition. For a sound realization
/// this returns the original operation exactly.
pub fn induced_operation(r: &Realization) -> CompOperation {
    let n = r.space_size();
    let rows = r
        .states_in
        .iter()
        .map(|input| {
            let members = &r.partition_in.blocks()[input];
            let share = Rational::from_big(
                BigUint::one(),
                BigUint::from(members.len() as u64),
            )
            .expect("non-empty block");
            let mut pushed = vec![Rational::zero(); n];
            for &src in members {
                pushed[r.perm.apply_index(src)] = share.clone();
            }
            let probs: Vec<Rational> = r
                .states_out
                .iter()
                .map(|out| {
                    r.partition_out.blocks()[out]
                        .iter()
                        .map(|&k| &pushed[k])
                        .sum()
                })
                .collect();
            Distribution::new(r.states_out.clone(), probs).expect("block pushforward sums to 1")
        })
        .collect();
    CompOperation::new(r.states_in.clone(), r.states_out.clone(), rows)
        .expect("induced rows are valid distributions")
}

/// Entropy bookkeeping for one application of an operation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyLedger {
    /// Change in computational entropy `H(C_F) - H(C_I)`.
    pub d_h_comp: f64,
    /// Change in non-computational entropy, from microstate bookkeeping.
    pub d_s_nc: f64,
    /// Net change in total microstate entropy (zero under exact dynamics).
    pub d_s_total: f64,
    pub unit: LogUnit,
}

/// Run `op` on `prior` at the microstate level and account for where the
/// entropy went.
///
/// The initial condition is maximum ignorance within each input block (all
/// microstates of a block equally likely given its state). The realizing
/// permutation conserves total microstate entropy exactly, so the
/// computational and non-computational changes balance; for deterministic
/// operations this is checked against the closed form
/// `dS_nc = -dH(C) = H(C_I) - H(C_F)`.
pub fn entropy_ledger(
    op: &CompOperation,
    prior: &Distribution,
    unit: LogUnit,
) -> Result<EntropyLedger> {
    let p_f = op.push_prior(prior)?;
    let d_h_comp_nats =
        entropy(&p_f, LogUnit::Nat) - entropy(prior, LogUnit::Nat);

    let r = realize(op, 1)?;
    let n = r.space_size();
    let share = Rational::from_big(BigUint::one(), BigUint::from(r.block_size))
        .expect("positive block size");
    let mut micro = vec![Rational::zero(); n];
    for (i, input) in r.states_in().iter().enumerate() {
        let weight = &prior.probs()[i] * &share;
        for &k in &r.partition_in().blocks()[input] {
            micro[k] = weight.clone();
        }
    }
    let before = Distribution::new(r.space().labels().to_vec(), micro)?;
    let after = r.perm().apply(&before)?;
    assert_eq!(
        before.prob_multiset(),
        after.prob_multiset(),
        "bijective dynamics must conserve the probability multiset"
    );

    let h_c_i = entropy(&lift(&before, r.partition_in())?, LogUnit::Nat);
    let h_c_f = entropy(&lift(&after, r.partition_out())?, LogUnit::Nat);
    assert!(
        (h_c_f - entropy(&p_f, LogUnit::Nat)).abs() < FLOAT_TOL,
        "lifted output entropy must match the final-state distribution"
    );
    let s_nc_i =
        joint_of(&before, r.partition_in())?.conditional_entropy(Axis::Y, LogUnit::Nat);
    let s_nc_f =
        joint_of(&after, r.partition_out())?.conditional_entropy(Axis::Y, LogUnit::Nat);
    let d_s_nc_nats = s_nc_f - s_nc_i;
    let d_s_total_nats = d_h_comp_nats + d_s_nc_nats;
    debug_assert!((h_c_i - entropy(prior, LogUnit::Nat)).abs() < FLOAT_TOL);

    if classify(op).deterministic {
        assert!(
            (d_s_nc_nats + d_h_comp_nats).abs() < FLOAT_TOL,
            "deterministic operations eject exactly the computational entropy they remove"
        );
    }

    Ok(EntropyLedger {
        d_h_comp: unit.from_nats(d_h_comp_nats),
        d_s_nc: unit.from_nats(d_s_nc_nats),
        d_s_total: unit.from_nats(d_s_total_nats),
        unit,
    })
}
