//! Spacetime protocols over register files of computational and environment
//! bits, with a per-step entropy ledger.
//!
//! A protocol is a sequence of typed steps over two-state registers: `input`
//! draws an unknown value from outside the model, `swap` and `cnot` are
//! bijective rewrites, `thermalize` re-randomizes environment registers
//! (destroying their correlations), and `merge`/`unmerge` reclassify a
//! computational register as non-computational and back. The engine keeps
//! the full joint distribution in exact rationals and emits a ledger
//! (subsystem entropies, pairwise mutual informations, independent
//! entropies, total entropy) after every step.
//!
//! Total entropy never decreases across a step; the engine fail-stops if a
//! protocol would make it do so.

mod canned;

pub use canned::{canned_protocol, fig_corr2_biased, CANNED_PROTOCOLS};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{entropy_nats, Distribution, DualValue, LogUnit, Rational};
use crate::realize::CompOperation;
use crate::FLOAT_TOL;

/// Hard cap on total registers: the joint has `2^n` entries.
const MAX_REGISTERS: usize = 20;

/// The registers a protocol acts on: an ordered list of computational bits
/// followed by an ordered list of environment bits. Every register has two
/// states, `0` and `1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RegisterFileRepr", into = "RegisterFileRepr")]
pub struct RegisterFile {
    comp: Vec<String>,
    env: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RegisterFileRepr {
    #[serde(default)]
    comp: Vec<String>,
    #[serde(default)]
    env: Vec<String>,
}

impl TryFrom<RegisterFileRepr> for RegisterFile {
    type Error = Error;
    fn try_from(r: RegisterFileRepr) -> Result<Self> {
        RegisterFile::new(r.comp, r.env)
    }
}

impl From<RegisterFile> for RegisterFileRepr {
    fn from(f: RegisterFile) -> Self {
        RegisterFileRepr {
            comp: f.comp,
            env: f.env,
        }
    }
}

impl RegisterFile {
    pub fn new(comp: Vec<impl Into<String>>, env: Vec<impl Into<String>>) -> Result<Self> {
        let comp: Vec<String> = comp.into_iter().map(Into::into).collect();
        let env: Vec<String> = env.into_iter().map(Into::into).collect();
        if comp.is_empty() && env.is_empty() {
            return Err(Error::EmptySupport);
        }
        if comp.len() + env.len() > MAX_REGISTERS {
            return Err(Error::BudgetTooLarge {
                requested: format!("{} registers", comp.len() + env.len()),
            });
        }
        let mut seen = BTreeSet::new();
        for label in comp.iter().chain(env.iter()) {
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(RegisterFile { comp, env })
    }

    pub fn comp(&self) -> &[String] {
        &self.comp
    }

    pub fn env(&self) -> &[String] {
        &self.env
    }

    /// All register names, computational first.
    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.comp.iter().chain(self.env.iter())
    }

    pub fn len(&self) -> usize {
        self.comp.len() + self.env.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one register
    }

    pub fn is_env(&self, name: &str) -> bool {
        self.env.iter().any(|e| e == name)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownRegister { name: name.into() })
    }
}

/// Starting condition for the environment registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EnvStart {
    /// Point mass on 0 (zero-entropy environment).
    #[default]
    Cold,
    /// Uniform (maximum-entropy environment).
    Hot,
}

/// One protocol step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum StepKind {
    /// Replace `target`'s marginal with a fresh value from outside the
    /// model, independent of every other register: uniform by default, or
    /// `P(1) = bias` when given.
    Input {
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias: Option<Rational>,
    },
    /// Exchange the values of two registers (bijective).
    Swap { a: String, b: String },
    /// `target ^= control` (bijective).
    Cnot { control: String, target: String },
    /// Replace the conditional distribution of `targets` given everything
    /// else by their equilibrium distribution (uniform unless `equilibrium`
    /// gives a per-register `P(1)`), destroying all their correlations.
    /// Targets must be environment registers or merged computational ones.
    Thermalize {
        targets: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        equilibrium: Option<BTreeMap<String, Rational>>,
    },
    /// Reclassify a computational register as non-computational.
    Merge { target: String },
    /// Reverse a prior merge.
    Unmerge { target: String },
}

impl StepKind {
    fn describe(&self) -> String {
        match self {
            StepKind::Input { target, bias: None } => format!("input {target}"),
            StepKind::Input {
                target,
                bias: Some(p),
            } => format!("input {target} (bias {p})"),
            StepKind::Swap { a, b } => format!("swap {a},{b}"),
            StepKind::Cnot { control, target } => format!("cnot {control}->{target}"),
            StepKind::Thermalize { targets, .. } => {
                format!("thermalize {}", targets.join(","))
            }
            StepKind::Merge { target } => format!("merge {target}"),
            StepKind::Unmerge { target } => format!("unmerge {target}"),
        }
    }

    fn is_input(&self) -> bool {
        matches!(self, StepKind::Input { .. })
    }
}

/// A step plus an optional display label for the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Step {
    pub fn new(kind: StepKind) -> Self {
        Step { kind, label: None }
    }

    fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.describe())
    }
}

/// A runnable protocol: registers, environment start condition, steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub registers: RegisterFile,
    #[serde(default)]
    pub env_start: EnvStart,
    pub steps: Vec<Step>,
}

/// The full joint state of a register file: an exact distribution over all
/// value tuples, plus the set of computational registers currently merged
/// (reclassified as non-computational).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    file: RegisterFile,
    joint: Vec<Rational>, // indexed by bitmask; bit k = register k's value
    merged: BTreeSet<String>,
}

impl GlobalState {
    /// All computational registers at 0; environment per `env_start`.
    pub fn initial(file: RegisterFile, env_start: EnvStart) -> Self {
        GlobalState::with_comp_mask(file, env_start, 0)
    }

    /// Computational registers set to the bits of `comp_mask` (bit k is the
    /// value of the k-th computational register); environment per
    /// `env_start`.
    fn with_comp_mask(file: RegisterFile, env_start: EnvStart, comp_mask: usize) -> Self {
        let n = file.len();
        let n_comp = file.comp.len();
        let mut joint = vec![Rational::zero(); 1 << n];
        match env_start {
            EnvStart::Cold => {
                joint[comp_mask] = Rational::one();
            }
            EnvStart::Hot => {
                let n_env = n - n_comp;
                let share = Rational::new(1, 1u64 << n_env).expect("power of two");
                for env_bits in 0..(1usize << n_env) {
                    joint[comp_mask | (env_bits << n_comp)] = share.clone();
                }
            }
        }
        GlobalState {
            file,
            joint,
            merged: BTreeSet::new(),
        }
    }

    pub fn file(&self) -> &RegisterFile {
        &self.file
    }

    pub fn merged(&self) -> &BTreeSet<String> {
        &self.merged
    }

    /// The exact joint as a labeled distribution; labels are value strings
    /// like `"010"`, one character per register in file order.
    pub fn joint_distribution(&self) -> Distribution {
        let n = self.file.len();
        let labels: Vec<String> = (0..self.joint.len())
            .map(|m| {
                (0..n)
                    .map(|k| if m >> k & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect();
        Distribution::new(labels, self.joint.clone()).expect("joint sums to 1")
    }

    /// Exact probability vector indexed by register bitmask.
    pub fn joint_probs(&self) -> &[Rational] {
        &self.joint
    }

    /// Marginal distribution of one register, over `["0", "1"]`.
    pub fn register_marginal(&self, name: &str) -> Result<Distribution> {
        let k = self.file.index(name)?;
        let mut p = [Rational::zero(), Rational::zero()];
        for (m, prob) in self.joint.iter().enumerate() {
            p[m >> k & 1] += prob;
        }
        let [p0, p1] = p;
        Distribution::new(vec!["0", "1"], vec![p0, p1])
    }

    /// Exact marginal over the registers selected by `mask`, indexed by
    /// compressed bitmask.
    fn marginal_probs(&self, mask: usize) -> Vec<Rational> {
        let k = mask.count_ones() as usize;
        let mut out = vec![Rational::zero(); 1 << k];
        for (m, prob) in self.joint.iter().enumerate() {
            if prob.is_zero() {
                continue;
            }
            out[compress_bits(m, mask)] += prob;
        }
        out
    }

    pub fn s_total_nats(&self) -> f64 {
        entropy_nats(&self.joint)
    }

    fn mask_of(&self, names: &[&str]) -> Result<usize> {
        let mut mask = 0usize;
        for name in names {
            mask |= 1 << self.file.index(name)?;
        }
        Ok(mask)
    }

    fn entropy_of_mask_nats(&self, mask: usize) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        entropy_nats(&self.marginal_probs(mask))
    }

    /// Entropy of a single register.
    pub fn register_h_nats(&self, name: &str) -> Result<f64> {
        Ok(self.entropy_of_mask_nats(self.mask_of(&[name])?))
    }

    /// Mutual information between two registers.
    pub fn mutual_information_nats(&self, a: &str, b: &str) -> Result<f64> {
        let ha = self.register_h_nats(a)?;
        let hb = self.register_h_nats(b)?;
        let hab = self.entropy_of_mask_nats(self.mask_of(&[a, b])?);
        Ok(ha + hb - hab)
    }

    /// Independent entropy of a register: its entropy conditioned on all the
    /// other registers, `S_ind(r) = H(r | rest) = S_total - H(rest)`.
    pub fn independent_entropy_nats(&self, name: &str) -> Result<f64> {
        let k = self.file.index(name)?;
        let all = (1usize << self.file.len()) - 1;
        let rest = all & !(1 << k);
        Ok(self.s_total_nats() - self.entropy_of_mask_nats(rest))
    }

    /// Entropy of the computational ledger column: the joint marginal of all
    /// unmerged computational registers.
    pub fn computational_h_nats(&self) -> f64 {
        let mut mask = 0usize;
        for (k, name) in self.file.names().enumerate() {
            if k < self.file.comp.len() && !self.merged.contains(name) {
                mask |= 1 << k;
            }
        }
        self.entropy_of_mask_nats(mask)
    }

    /// Everything that is not computational: `S_total - H(C)`.
    pub fn noncomputational_s_nats(&self) -> f64 {
        self.s_total_nats() - self.computational_h_nats()
    }

    /// Apply one step to the state.
    pub fn apply(&mut self, kind: &StepKind) -> Result<()> {
        match kind {
            StepKind::Input { target, bias } => self.apply_input(target, bias.as_ref()),
            StepKind::Swap { a, b } => self.apply_swap(a, b),
            StepKind::Cnot { control, target } => self.apply_cnot(control, target),
            StepKind::Thermalize {
                targets,
                equilibrium,
            } => self.apply_thermalize(targets, equilibrium.as_ref()),
            StepKind::Merge { target } => self.apply_merge(target),
            StepKind::Unmerge { target } => self.apply_unmerge(target),
        }
    }

    /// Replace `target`'s marginal with an independent fresh value.
    pub fn apply_input(&mut self, target: &str, bias: Option<&Rational>) -> Result<()> {
        let p1 = match bias {
            Some(p) => {
                if p > &Rational::one() {
                    return Err(Error::InvalidProbability {
                        value: p.to_string(),
                    });
                }
                p.clone()
            }
            None => Rational::new(1, 2).expect("1/2"),
        };
        let p0 = Rational::one() - p1.clone();
        let bit = 1usize << self.file.index(target)?;
        let mut next = vec![Rational::zero(); self.joint.len()];
        for m in 0..self.joint.len() {
            if m & bit != 0 {
                continue;
            }
            let total = &self.joint[m] + &self.joint[m | bit];
            next[m] = &total * &p0;
            next[m | bit] = total * p1.clone();
        }
        self.joint = next;
        Ok(())
    }

    pub fn apply_swap(&mut self, a: &str, b: &str) -> Result<()> {
        if a == b {
            return Err(Error::InvalidOperation {
                detail: format!("swap requires two distinct registers, got {a:?} twice"),
            });
        }
        let ka = self.file.index(a)?;
        let kb = self.file.index(b)?;
        let mut next = vec![Rational::zero(); self.joint.len()];
        for (m, prob) in self.joint.iter().enumerate() {
            let ba = m >> ka & 1;
            let bb = m >> kb & 1;
            let mut target = m & !(1 << ka) & !(1 << kb);
            target |= bb << ka | ba << kb;
            next[target] = prob.clone();
        }
        self.joint = next;
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: &str, target: &str) -> Result<()> {
        if control == target {
            return Err(Error::InvalidOperation {
                detail: format!("cnot requires distinct registers, got {control:?} twice"),
            });
        }
        let kc = self.file.index(control)?;
        let kt = self.file.index(target)?;
        let mut next = vec![Rational::zero(); self.joint.len()];
        for (m, prob) in self.joint.iter().enumerate() {
            let target_mask = if m >> kc & 1 == 1 { m ^ (1 << kt) } else { m };
            next[target_mask] = prob.clone();
        }
        self.joint = next;
        Ok(())
    }

    pub fn apply_thermalize(
        &mut self,
        targets: &[String],
        equilibrium: Option<&BTreeMap<String, Rational>>,
    ) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::InvalidOperation {
                detail: "thermalize requires at least one target".into(),
            });
        }
        let mut bits = Vec::with_capacity(targets.len());
        let mut seen = BTreeSet::new();
        for name in targets {
            if !seen.insert(name) {
                return Err(Error::DuplicateLabel {
                    label: name.clone(),
                });
            }
            let k = self.file.index(name)?;
            // environment registers always thermalize; computational ones
            // only while merged (their value is non-computational then)
            if !self.file.is_env(name) && !self.merged.contains(name) {
                return Err(Error::NotEnvironment { name: name.clone() });
            }
            bits.push((k, name));
        }
        if let Some(eq) = equilibrium {
            for name in eq.keys() {
                if !targets.contains(name) {
                    return Err(Error::UnknownRegister { name: name.clone() });
                }
            }
        }
        let half = Rational::new(1, 2).expect("1/2");
        let weights: Vec<(usize, Rational, Rational)> = bits
            .iter()
            .map(|(k, name)| {
                let p1 = equilibrium
                    .and_then(|eq| eq.get(*name))
                    .cloned()
                    .unwrap_or_else(|| half.clone());
                if p1 > Rational::one() {
                    return Err(Error::InvalidProbability {
                        value: p1.to_string(),
                    });
                }
                let p0 = Rational::one() - p1.clone();
                Ok((*k, p0, p1))
            })
            .collect::<Result<Vec<_>>>()?;

        let target_mask: usize = weights.iter().map(|(k, _, _)| 1usize << k).sum();
        let mut next = vec![Rational::zero(); self.joint.len()];
        for rest in 0..self.joint.len() {
            if rest & target_mask != 0 {
                continue;
            }
            // total mass of this configuration of the untouched registers
            let mut total = Rational::zero();
            let mut sub = target_mask;
            loop {
                total += &self.joint[rest | sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & target_mask;
            }
            if total.is_zero() {
                continue;
            }
            let mut sub = target_mask;
            loop {
                let mut w = total.clone();
                for (k, p0, p1) in &weights {
                    w = w * if sub >> k & 1 == 1 { p1.clone() } else { p0.clone() };
                }
                next[rest | sub] = w;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & target_mask;
            }
        }
        self.joint = next;
        Ok(())
    }

    pub fn apply_merge(&mut self, target: &str) -> Result<()> {
        self.file.index(target)?;
        if self.file.is_env(target) {
            return Err(Error::MergeStateError {
                detail: format!("register {target:?} is already non-computational"),
            });
        }
        if !self.merged.insert(target.to_string()) {
            return Err(Error::MergeStateError {
                detail: format!("register {target:?} is already merged"),
            });
        }
        Ok(())
    }

    pub fn apply_unmerge(&mut self, target: &str) -> Result<()> {
        self.file.index(target)?;
        if !self.merged.remove(target) {
            return Err(Error::MergeStateError {
                detail: format!("register {target:?} is not merged"),
            });
        }
        Ok(())
    }
}

/// Extract bits of `m` at the positions set in `mask`, packed densely.
fn compress_bits(m: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut out_bit = 0;
    let mut rem = mask;
    while rem != 0 {
        let k = rem.trailing_zeros() as usize;
        out |= (m >> k & 1) << out_bit;
        out_bit += 1;
        rem &= rem - 1;
    }
    out
}

/// Ledger values for one register at one instant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegisterLedger {
    pub h: DualValue,
    pub s_ind: DualValue,
}

/// The full ledger after one step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub s_total: DualValue,
    pub computational_h: DualValue,
    pub noncomputational_s: DualValue,
    pub registers: BTreeMap<String, RegisterLedger>,
    /// Pairwise mutual informations, keyed `"a;b"` in register order.
    pub mutual: BTreeMap<String, DualValue>,
    pub merged: Vec<String>,
}

impl Snapshot {
    fn capture(state: &GlobalState, label: String) -> Snapshot {
        let names: Vec<&String> = state.file().names().collect();
        let registers = names
            .iter()
            .map(|name| {
                let ledger = RegisterLedger {
                    h: DualValue::from_nats(
                        state.register_h_nats(name).expect("known register"),
                    ),
                    s_ind: DualValue::from_nats(
                        state
                            .independent_entropy_nats(name)
                            .expect("known register"),
                    ),
                };
                ((*name).clone(), ledger)
            })
            .collect();
        let mut mutual = BTreeMap::new();
        for (i, a) in names.iter().enumerate() {
            for b in names.iter().skip(i + 1) {
                let mi = state
                    .mutual_information_nats(a, b)
                    .expect("known registers");
                mutual.insert(format!("{a};{b}"), DualValue::from_nats(mi));
            }
        }
        Snapshot {
            label,
            s_total: DualValue::from_nats(state.s_total_nats()),
            computational_h: DualValue::from_nats(state.computational_h_nats()),
            noncomputational_s: DualValue::from_nats(state.noncomputational_s_nats()),
            registers,
            mutual,
            merged: state.merged().iter().cloned().collect(),
        }
    }
}

/// Per-step ledger for a whole protocol run.
///
/// `net_delta_s_total` measures the permanent entropy cost of the protocol:
/// the change in total entropy from the moment all leading `input` steps
/// have delivered their values (those steps import an unknown value from
/// outside the model, so the entropy they bring in is the starting ledger,
/// not a cost of the protocol).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timeline {
    pub snapshots: Vec<Snapshot>,
    /// Index of the snapshot the net delta is measured from.
    pub baseline_index: usize,
    pub net_delta_s_total: DualValue,
}

impl Timeline {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("at least the initial snapshot")
    }

    /// Aligned plain-text ledger, one row per snapshot.
    pub fn to_text(&self, unit: LogUnit) -> String {
        let unit_name = match unit {
            LogUnit::Nat => "nat",
            LogUnit::Bit => "bit",
        };
        let reg_names: Vec<String> = self
            .snapshots
            .first()
            .map(|s| s.registers.keys().cloned().collect())
            .unwrap_or_default();
        let pair_names: Vec<String> = self
            .snapshots
            .first()
            .map(|s| s.mutual.keys().cloned().collect())
            .unwrap_or_default();

        let mut header = vec![
            "step".to_string(),
            "S_tot".to_string(),
            "H(C)".to_string(),
            "S_nc".to_string(),
        ];
        for r in &reg_names {
            header.push(format!("H({r})"));
            header.push(format!("Si({r})"));
        }
        for p in &pair_names {
            header.push(format!("I({p})"));
        }

        let mut rows: Vec<Vec<String>> = vec![header];
        for snap in &self.snapshots {
            let mut row = vec![
                snap.label.clone(),
                format!("{:.6}", snap.s_total.get(unit)),
                format!("{:.6}", snap.computational_h.get(unit)),
                format!("{:.6}", snap.noncomputational_s.get(unit)),
            ];
            for r in &reg_names {
                let ledger = &snap.registers[r];
                row.push(format!("{:.6}", ledger.h.get(unit)));
                row.push(format!("{:.6}", ledger.s_ind.get(unit)));
            }
            for p in &pair_names {
                row.push(format!("{:.6}", snap.mutual[p].get(unit)));
            }
            rows.push(row);
        }

        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("ledger ({unit_name})\n");
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<width$}", width = widths[c])
                    } else {
                        format!("{cell:>width$}", width = widths[c])
                    }
                })
                .collect();
            out.push_str(&line.join("  "));
            out.push('\n');
        }
        out.push_str(&format!(
            "net dS_total = {:.6} {unit_name} (from snapshot {})\n",
            self.net_delta_s_total.get(unit),
            self.baseline_index
        ));
        out
    }
}

/// A completed run: the ledger plus the exact state after every step
/// (`states[0]` is the initial state).
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub timeline: Timeline,
    pub states: Vec<GlobalState>,
}

impl ProtocolRun {
    pub fn final_state(&self) -> &GlobalState {
        self.states.last().expect("at least the initial state")
    }

    pub fn baseline_state(&self) -> &GlobalState {
        &self.states[self.timeline.baseline_index]
    }
}

impl Protocol {
    /// Execute the steps in order, emitting the full ledger after each.
    ///
    /// Errors from a step are tagged with its index. A step that would
    /// decrease total entropy beyond tolerance aborts the run: under this
    /// model every step is a mixture of bijections, so a decrease means the
    /// protocol is physically unrealizable as written (for example a biased
    /// input overwriting a mixed register).
    pub fn run(&self) -> Result<ProtocolRun> {
        let mut state = GlobalState::initial(self.registers.clone(), self.env_start);
        let mut states = vec![state.clone()];
        let mut snapshots = vec![Snapshot::capture(&state, "init".into())];
        let mut s_prev = state.s_total_nats();
        for (index, step) in self.steps.iter().enumerate() {
            state
                .apply(&step.kind)
                .map_err(|source| Error::Step {
                    index,
                    source: Box::new(source),
                })?;
            let s_now = state.s_total_nats();
            if s_now < s_prev - FLOAT_TOL {
                return Err(Error::SecondLawViolation {
                    index,
                    before: s_prev,
                    after: s_now,
                });
            }
            s_prev = s_now;
            snapshots.push(Snapshot::capture(&state, step.display_label()));
            states.push(state.clone());
        }
        let baseline_index = self
            .steps
            .iter()
            .take_while(|s| s.kind.is_input())
            .count();
        let net = snapshots.last().expect("non-empty").s_total.nats
            - snapshots[baseline_index].s_total.nats;
        Ok(ProtocolRun {
            timeline: Timeline {
                snapshots,
                baseline_index,
                net_delta_s_total: DualValue::from_nats(net),
            },
            states,
        })
    }

    /// The computational operation the non-input steps implement on the
    /// computational registers: run the protocol from every computational
    /// point mass and read off the final distribution over computational
    /// tuples (environment traced out).
    ///
    /// Tuple labels are value strings in computational register order, e.g.
    /// `"10"` for first register 1, second register 0.
    pub fn induced_operation(&self) -> Result<CompOperation> {
        let n_comp = self.registers.comp.len();
        if n_comp == 0 {
            return Err(Error::EmptySupport);
        }
        let leading_inputs = self
            .steps
            .iter()
            .take_while(|s| s.kind.is_input())
            .count();
        let labels: Vec<String> = (0..(1usize << n_comp))
            .map(|t| {
                (0..n_comp)
                    .map(|k| if t >> k & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect();
        let comp_mask = (1usize << n_comp) - 1;
        let rows = (0..(1usize << n_comp))
            .map(|t| {
                let mut state =
                    GlobalState::with_comp_mask(self.registers.clone(), self.env_start, t);
                for (index, step) in self.steps.iter().enumerate().skip(leading_inputs) {
                    state
                        .apply(&step.kind)
                        .map_err(|source| Error::Step {
                            index,
                            source: Box::new(source),
                        })?;
                }
                Distribution::new(labels.clone(), state.marginal_probs(comp_mask))
            })
            .collect::<Result<Vec<_>>>()?;
        CompOperation::new(labels.clone(), labels, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realize::classify;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn be_file() -> RegisterFile {
        RegisterFile::new(vec!["B"], vec!["E"]).unwrap()
    }

    fn step(kind: StepKind) -> Step {
        Step::new(kind)
    }

    fn input(target: &str) -> Step {
        step(StepKind::Input {
            target: target.into(),
            bias: None,
        })
    }

    fn swap(a: &str, b: &str) -> Step {
        step(StepKind::Swap {
            a: a.into(),
            b: b.into(),
        })
    }

    fn cnot(control: &str, target: &str) -> Step {
        step(StepKind::Cnot {
            control: control.into(),
            target: target.into(),
        })
    }

    fn thermalize(targets: &[&str]) -> Step {
        step(StepKind::Thermalize {
            targets: targets.iter().map(|s| s.to_string()).collect(),
            equilibrium: None,
        })
    }

    const BIT: f64 = std::f64::consts::LN_2;

    #[test]
    fn input_makes_register_uniform_and_uncorrelated() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        state.apply_input("B", None).unwrap();
        assert!((state.register_h_nats("B").unwrap() - BIT).abs() < FLOAT_TOL);
        assert!(state.mutual_information_nats("B", "E").unwrap().abs() < FLOAT_TOL);
        // two equiprobable tuples in the joint
        let joint = state.joint_distribution();
        assert_eq!(joint.prob("00").unwrap(), &r("1/2"));
        assert_eq!(joint.prob("10").unwrap(), &r("1/2")); // B=1, E=0
        assert!(joint.prob("01").unwrap().is_zero());
    }

    #[test]
    fn input_is_idempotent_on_marginals() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        state.apply_input("B", None).unwrap();
        let before = state.joint_probs().to_vec();
        state.apply_input("B", None).unwrap();
        assert_eq!(state.joint_probs(), &before[..]);
    }

    #[test]
    fn swap_moves_entropy_between_registers() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        state.apply_input("B", None).unwrap();
        let s_before = state.s_total_nats();
        state.apply_swap("B", "E").unwrap();
        assert!(state.register_h_nats("B").unwrap().abs() < FLOAT_TOL);
        assert!((state.register_h_nats("E").unwrap() - BIT).abs() < FLOAT_TOL);
        assert!((state.s_total_nats() - s_before).abs() < FLOAT_TOL);
    }

    #[test]
    fn swap_twice_is_identity() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        state.apply_input("B", None).unwrap();
        let before = state.joint_probs().to_vec();
        state.apply_swap("B", "E").unwrap();
        state.apply_swap("B", "E").unwrap();
        assert_eq!(state.joint_probs(), &before[..]);
    }

    #[test]
    fn swap_preserves_third_party_correlations() {
        // correlate I with R, then swap R with E: I;E correlation appears,
        // I;R correlation moves away, exactly
        let file = RegisterFile::new(vec!["I", "R"], vec!["E"]).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("I", None).unwrap();
        state.apply_cnot("I", "R").unwrap();
        let i_r = state.mutual_information_nats("I", "R").unwrap();
        state.apply_swap("R", "E").unwrap();
        let i_e = state.mutual_information_nats("I", "E").unwrap();
        assert!((i_r - i_e).abs() < FLOAT_TOL);
        assert!(state.mutual_information_nats("I", "R").unwrap().abs() < FLOAT_TOL);
    }

    #[test]
    fn cnot_correlates_registers() {
        let file = RegisterFile::new(vec!["I", "R"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("I", None).unwrap();
        state.apply_cnot("I", "R").unwrap();
        let joint = state.joint_distribution();
        assert_eq!(joint.prob("00").unwrap(), &r("1/2"));
        assert_eq!(joint.prob("11").unwrap(), &r("1/2"));
        assert!((state.mutual_information_nats("I", "R").unwrap() - BIT).abs() < FLOAT_TOL);
    }

    #[test]
    fn cnot_twice_decomputes() {
        let file = RegisterFile::new(vec!["I", "R"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("I", None).unwrap();
        let before = state.joint_probs().to_vec();
        state.apply_cnot("I", "R").unwrap();
        state.apply_cnot("I", "R").unwrap();
        assert_eq!(state.joint_probs(), &before[..]);
    }

    #[test]
    fn cnot_with_zero_control_is_noop() {
        let file = RegisterFile::new(vec!["I", "R"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("R", None).unwrap();
        let before = state.joint_probs().to_vec();
        state.apply_cnot("I", "R").unwrap(); // I is point mass 0
        assert_eq!(state.joint_probs(), &before[..]);
    }

    #[test]
    fn thermalize_noop_on_uniform_uncorrelated_env() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Hot);
        let before = state.joint_probs().to_vec();
        let s_before = state.s_total_nats();
        state.apply_thermalize(&["E".into()], None).unwrap();
        assert_eq!(state.joint_probs(), &before[..]);
        assert!((state.s_total_nats() - s_before).abs() < FLOAT_TOL);
    }

    #[test]
    fn thermalize_destroys_correlation_for_one_bit_cost() {
        let file = RegisterFile::new(vec!["I", "R"], vec!["E"]).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("I", None).unwrap();
        state.apply_cnot("I", "R").unwrap();
        state.apply_swap("R", "E").unwrap();
        let s_before = state.s_total_nats();
        assert!((state.mutual_information_nats("I", "E").unwrap() - BIT).abs() < FLOAT_TOL);
        state.apply_thermalize(&["E".into()], None).unwrap();
        assert!(state.mutual_information_nats("I", "E").unwrap().abs() < FLOAT_TOL);
        assert!((state.s_total_nats() - s_before - BIT).abs() < FLOAT_TOL);
    }

    #[test]
    fn thermalize_heats_a_cold_environment() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        let s_before = state.s_total_nats();
        state.apply_thermalize(&["E".into()], None).unwrap();
        assert!((state.s_total_nats() - s_before - BIT).abs() < FLOAT_TOL);
    }

    #[test]
    fn thermalize_rejects_unmerged_computational_register() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        let err = state.apply_thermalize(&["B".into()], None);
        assert!(matches!(err, Err(Error::NotEnvironment { .. })));
    }

    #[test]
    fn merge_reclassifies_entropy_not_state() {
        let file = RegisterFile::new(vec!["X", "Y"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("X", None).unwrap();
        state.apply_cnot("X", "Y").unwrap();
        let s_total = state.s_total_nats();
        let h_c = state.computational_h_nats();
        assert!((h_c - BIT).abs() < FLOAT_TOL); // H(X,Y) = 1 bit
        state.apply_merge("Y").unwrap();
        // total unchanged, but Y's share moved to the nc column
        assert!((state.s_total_nats() - s_total).abs() < FLOAT_TOL);
        assert!((state.computational_h_nats() - BIT).abs() < FLOAT_TOL); // H(X) alone is still 1 bit
        state.apply_unmerge("Y").unwrap();
        assert!((state.computational_h_nats() - h_c).abs() < FLOAT_TOL);
    }

    #[test]
    fn merge_unmerge_without_thermalize_is_identity() {
        let file = RegisterFile::new(vec!["X", "Y"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("X", None).unwrap();
        state.apply_cnot("X", "Y").unwrap();
        let snapshot_before = Snapshot::capture(&state, "before".into());
        state.apply_merge("Y").unwrap();
        state.apply_unmerge("Y").unwrap();
        let snapshot_after = Snapshot::capture(&state, "after".into());
        assert!(
            (snapshot_before.s_total.nats - snapshot_after.s_total.nats).abs() < FLOAT_TOL
        );
        assert!(
            (snapshot_before.computational_h.nats - snapshot_after.computational_h.nats)
                .abs()
                < FLOAT_TOL
        );
        assert_eq!(snapshot_after.merged.len(), 0);
    }

    #[test]
    fn merge_thermalize_unmerge_costs_the_mutual_information() {
        let file = RegisterFile::new(vec!["X", "Y"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("X", None).unwrap();
        state.apply_cnot("X", "Y").unwrap();
        let mi = state.mutual_information_nats("X", "Y").unwrap();
        let s_before = state.s_total_nats();
        state.apply_merge("Y").unwrap();
        state.apply_thermalize(&["Y".into()], None).unwrap();
        state.apply_unmerge("Y").unwrap();
        assert!((state.s_total_nats() - s_before - mi).abs() < FLOAT_TOL);
        assert!(state.mutual_information_nats("X", "Y").unwrap().abs() < FLOAT_TOL);
    }

    #[test]
    fn merge_thermalize_unmerge_on_uncorrelated_bit_is_free() {
        let file = RegisterFile::new(vec!["X"], Vec::<String>::new()).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        state.apply_input("X", None).unwrap();
        let s_before = state.s_total_nats();
        state.apply_merge("X").unwrap();
        state.apply_thermalize(&["X".into()], None).unwrap();
        state.apply_unmerge("X").unwrap();
        assert!((state.s_total_nats() - s_before).abs() < FLOAT_TOL);
    }

    #[test]
    fn merge_state_errors() {
        let file = RegisterFile::new(vec!["X"], vec!["E"]).unwrap();
        let mut state = GlobalState::initial(file, EnvStart::Cold);
        assert!(matches!(
            state.apply_unmerge("X"),
            Err(Error::MergeStateError { .. })
        ));
        state.apply_merge("X").unwrap();
        assert!(matches!(
            state.apply_merge("X"),
            Err(Error::MergeStateError { .. })
        ));
        assert!(matches!(
            state.apply_merge("E"),
            Err(Error::MergeStateError { .. })
        ));
    }

    #[test]
    fn unknown_registers_are_reported() {
        let mut state = GlobalState::initial(be_file(), EnvStart::Cold);
        assert!(matches!(
            state.apply_input("Q", None),
            Err(Error::UnknownRegister { .. })
        ));
        assert!(matches!(
            state.apply_swap("B", "Q"),
            Err(Error::UnknownRegister { .. })
        ));
    }

    #[test]
    fn run_reports_step_index_on_error() {
        let protocol = Protocol {
            registers: be_file(),
            env_start: EnvStart::Cold,
            steps: vec![input("B"), swap("B", "Q")],
        };
        match protocol.run() {
            Err(Error::Step { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected step error, got {other:?}"),
        }
    }

    #[test]
    fn reversible_erasure_of_uncorrelated_bit_is_free() {
        let protocol = canned_protocol("fig_corr1").unwrap();
        let run = protocol.run().unwrap();
        let t = &run.timeline;
        assert!(t.net_delta_s_total.bits.abs() < FLOAT_TOL);
        // the bit of entropy is present at both measured endpoints
        assert!(
            (t.snapshots[t.baseline_index].registers["B"].h.bits - 1.0).abs() < FLOAT_TOL
        );
        assert!((t.final_snapshot().registers["B"].h.bits - 1.0).abs() < FLOAT_TOL);
        // and the process is logically irreversible: its induced operation
        // has overlapping, non-point-mass rows
        let op = protocol.induced_operation().unwrap();
        let class = classify(&op);
        assert!(!class.deterministic && !class.reversible);
    }

    #[test]
    fn oblivious_erasure_of_correlated_bit_costs_one_bit() {
        let protocol = canned_protocol("fig_corr2").unwrap();
        let run = protocol.run().unwrap();
        let t = &run.timeline;
        assert!((t.net_delta_s_total.bits - 1.0).abs() < FLOAT_TOL);
        assert!((t.snapshots[t.baseline_index].s_total.bits - 1.0).abs() < FLOAT_TOL);
        assert!((t.final_snapshot().s_total.bits - 2.0).abs() < FLOAT_TOL);
    }

    #[test]
    fn decomputation_is_free_and_exact() {
        let protocol = canned_protocol("fig_corr3").unwrap();
        let run = protocol.run().unwrap();
        assert!(run.timeline.net_delta_s_total.bits.abs() < FLOAT_TOL);
        let final_r = run.final_state().register_marginal("R").unwrap();
        assert!(final_r.prob("0").unwrap().is_one()); // exact point mass
        let class = classify(&protocol.induced_operation().unwrap());
        assert!(class.deterministic && class.reversible);
    }

    #[test]
    fn mutual_information_loss_scenario() {
        let protocol = canned_protocol("fig_mutinfo").unwrap();
        let run = protocol.run().unwrap();
        assert!((run.timeline.net_delta_s_total.bits - 1.0).abs() < FLOAT_TOL);
    }

    #[test]
    fn biased_erasure_costs_the_binary_entropy() {
        for p in ["1/8", "1/4", "1/2"] {
            let bias = r(p);
            let pf = bias.to_f64();
            let h2_bits = -(pf * pf.log2() + (1.0 - pf) * (1.0 - pf).log2());
            let run = fig_corr2_biased(bias).run().unwrap();
            assert!(
                (run.timeline.net_delta_s_total.bits - h2_bits).abs() < FLOAT_TOL,
                "bias {p}: got {} want {h2_bits}",
                run.timeline.net_delta_s_total.bits
            );
        }
    }

    #[test]
    fn bijective_steps_preserve_probability_multiset_exactly() {
        let protocol = Protocol {
            registers: RegisterFile::new(vec!["I", "R"], vec!["E"]).unwrap(),
            env_start: EnvStart::Cold,
            steps: vec![
                input("I"),
                cnot("I", "R"),
                swap("R", "E"),
                swap("R", "E"),
                cnot("I", "R"),
            ],
        };
        let run = protocol.run().unwrap();
        // steps 1.. are bijective: multisets equal across each
        for w in run.states[1..].windows(2) {
            let mut a = w[0].joint_probs().to_vec();
            let mut b = w[1].joint_probs().to_vec();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn second_law_guard_triggers_on_biased_overwrite() {
        // overwriting a uniform register with a biased input would lower
        // total entropy; the engine refuses
        let protocol = Protocol {
            registers: RegisterFile::new(vec!["B"], Vec::<String>::new()).unwrap(),
            env_start: EnvStart::Cold,
            steps: vec![
                input("B"),
                step(StepKind::Input {
                    target: "B".into(),
                    bias: Some(r("1/8")),
                }),
            ],
        };
        assert!(matches!(
            protocol.run(),
            Err(Error::SecondLawViolation { index: 1, .. })
        ));
    }

    #[test]
    fn independent_entropy_identity_holds_at_every_step() {
        let protocol = canned_protocol("fig_corr2").unwrap();
        let run = protocol.run().unwrap();
        for state in &run.states {
            let names: Vec<String> = state.file().names().cloned().collect();
            for a in &names {
                for b in &names {
                    if a == b {
                        continue;
                    }
                    // pairwise identity: H(b) - I(a;b) equals the entropy of
                    // b conditioned on a (computed from the pair marginal)
                    let hb = state.register_h_nats(b).unwrap();
                    let mi = state.mutual_information_nats(a, b).unwrap();
                    let mask_a = state.mask_of(&[a.as_str()]).unwrap();
                    let mask_ab = state.mask_of(&[a.as_str(), b.as_str()]).unwrap();
                    let h_b_given_a = state.entropy_of_mask_nats(mask_ab)
                        - state.entropy_of_mask_nats(mask_a);
                    assert!((hb - mi - h_b_given_a).abs() < FLOAT_TOL);
                }
            }
        }
    }

    #[test]
    fn joint_always_sums_to_one() {
        let protocol = canned_protocol("fig_corr2").unwrap();
        let run = protocol.run().unwrap();
        for state in &run.states {
            let total: Rational = state.joint_probs().iter().sum();
            assert!(total.is_one());
        }
    }

    #[test]
    fn protocol_json_round_trip() {
        let protocol = canned_protocol("fig_corr2").unwrap();
        let json = serde_json::to_string(&protocol).unwrap();
        let back: Protocol = serde_json::from_str(&json).unwrap();
        assert_eq!(back, protocol);
        // the documented wire form parses
        let doc: Protocol = serde_json::from_str(
            r#"{"registers": {"comp": ["I","R"], "env": ["E"]},
                "steps": [{"op":"input","target":"I"},
                          {"op":"cnot","control":"I","target":"R"}]}"#,
        )
        .unwrap();
        assert_eq!(doc.registers.comp(), &["I", "R"]);
        assert_eq!(doc.steps.len(), 2);
    }

    #[test]
    fn timeline_text_ledger_is_aligned_and_deterministic() {
        let run = canned_protocol("fig_corr1").unwrap().run().unwrap();
        let a = run.timeline.to_text(LogUnit::Bit);
        let b = run.timeline.to_text(LogUnit::Bit);
        assert_eq!(a, b);
        assert!(a.contains("S_tot"));
        assert!(a.lines().count() >= run.timeline.snapshots.len() + 1);
    }
}
