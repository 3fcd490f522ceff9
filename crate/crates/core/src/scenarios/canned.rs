//! Bundled demonstration protocols.
//!
//! Four named scenarios cover the canonical entropy stories: moving an
//! uncorrelated random bit out to the environment and back (free), obliviously
//! erasing a computed bit (costs its mutual information), decomputing a
//! computed bit in place (free), and losing a correlation through
//! merge/thermalize/unmerge bookkeeping.

use std::collections::BTreeMap;

use crate::infomath::Rational;
use crate::scenarios::{EnvStart, Protocol, RegisterFile, Step, StepKind};

/// Names accepted by [`canned_protocol`].
pub const CANNED_PROTOCOLS: [&str; 4] =
    ["fig_corr1", "fig_corr2", "fig_corr3", "fig_mutinfo"];

fn input(target: &str) -> Step {
    Step::new(StepKind::Input {
        target: target.into(),
        bias: None,
    })
}

fn swap(a: &str, b: &str) -> Step {
    Step::new(StepKind::Swap {
        a: a.into(),
        b: b.into(),
    })
}

fn cnot(control: &str, target: &str) -> Step {
    Step::new(StepKind::Cnot {
        control: control.into(),
        target: target.into(),
    })
}

fn thermalize(targets: &[&str]) -> Step {
    Step::new(StepKind::Thermalize {
        targets: targets.iter().map(|s| s.to_string()).collect(),
        equilibrium: None,
    })
}

/// Look up a bundled protocol by name.
pub fn canned_protocol(name: &str) -> Option<Protocol> {
    match name {
        // Thermodynamically reversible erasure/re-randomization of an
        // unknown, uncorrelated bit: net entropy cost zero, yet logically
        // irreversible.
        "fig_corr1" => Some(Protocol {
            registers: RegisterFile::new(vec!["B"], vec!["E"]).expect("valid registers"),
            env_start: EnvStart::Cold,
            steps: vec![
                input("B"),
                swap("B", "E"),
                thermalize(&["E"]),
                swap("E", "B"),
            ],
        }),
        // Oblivious erasure of a computed (correlated) bit: the correlation
        // thermalizes away and total entropy rises by one bit.
        "fig_corr2" => Some(Protocol {
            registers:
                RegisterFile::new(vec!["I", "R"], vec!["E"]).expect("valid registers"),
            env_start: EnvStart::Cold,
            steps: vec![
                input("I"),
                cnot("I", "R"),
                swap("R", "E"),
                thermalize(&["E"]),
                swap("E", "R"),
            ],
        }),
        // Reversible decomputation: undo the computation instead of ejecting
        // it. The environment can even start hot; nothing is transferred.
        "fig_corr3" => Some(Protocol {
            registers:
                RegisterFile::new(vec!["I", "R"], vec!["E"]).expect("valid registers"),
            env_start: EnvStart::Hot,
            steps: vec![input("I"), cnot("I", "R"), cnot("I", "R")],
        }),
        // Correlation loss in merge bookkeeping: reclassify the computed bit
        // as non-computational, let it thermalize, reclassify back.
        "fig_mutinfo" => Some(Protocol {
            registers: RegisterFile::new(vec!["X", "Y"], Vec::<String>::new())
                .expect("valid registers"),
            env_start: EnvStart::Cold,
            steps: vec![
                input("X"),
                cnot("X", "Y"),
                Step::new(StepKind::Merge {
                    target: "Y".into(),
                }),
                thermalize(&["Y"]),
                Step::new(StepKind::Unmerge {
                    target: "Y".into(),
                }),
            ],
        }),
        _ => None,
    }
}

/// The oblivious-erasure scenario generalized to a biased input bit.
///
/// The input delivers 1 with probability `bias`, and the erasure mechanism
/// is matched to that statistic: the environment register equilibrates at
/// the same bias. The permanent entropy cost is then exactly the binary
/// entropy of the bias (the mutual information the computed bit carried),
/// which is one bit at `bias = 1/2`.
pub fn fig_corr2_biased(bias: Rational) -> Protocol {
    Protocol {
        registers: RegisterFile::new(vec!["I", "R"], vec!["E"]).expect("valid registers"),
        env_start: EnvStart::Cold,
        steps: vec![
            Step::new(StepKind::Input {
                target: "I".into(),
                bias: Some(bias.clone()),
            }),
            cnot("I", "R"),
            swap("R", "E"),
            Step::new(StepKind::Thermalize {
                targets: vec!["E".into()],
                equilibrium: Some(BTreeMap::from([("E".to_string(), bias)])),
            }),
            swap("E", "R"),
        ],
    }
}
