use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infomath::{entropy_nats, kahan_sum, Distribution, KahanSum, LogUnit, Rational};
use crate::FLOAT_TOL;

/// Which variable of a joint distribution an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// A joint probability distribution over ordered pairs `(x, y)`, stored as a
/// matrix of exact rational cell probabilities with X indexing rows.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct JointDistribution {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    cells: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    x: Vec<String>,
    y: Vec<String>,
    cells: Vec<Vec<Rational>>,
}

impl TryFrom<JointRepr> for JointDistribution {
    type Error = Error;
    fn try_from(r: JointRepr) -> Result<Self> {
        JointDistribution::new(r.x, r.y, r.cells)
    }
}

impl From<JointDistribution> for JointRepr {
    fn from(j: JointDistribution) -> Self {
        JointRepr {
            x: j.x_labels,
            y: j.y_labels,
            cells: j.cells,
        }
    }
}

impl JointDistribution {
    pub fn new(
        x_labels: Vec<impl Into<String>>,
        y_labels: Vec<impl Into<String>>,
        cells: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let x_labels: Vec<String> = x_labels.into_iter().map(Into::into).collect();
        let y_labels: Vec<String> = y_labels.into_iter().map(Into::into).collect();
        if x_labels.is_empty() || y_labels.is_empty() {
            return Err(Error::EmptySupport);
        }
        for labels in [&x_labels, &y_labels] {
            let mut seen = BTreeSet::new();
            for label in labels {
                if !seen.insert(label) {
                    return Err(Error::DuplicateLabel {
                        label: label.clone(),
                    });
                }
            }
        }
        if cells.len() != x_labels.len() {
            return Err(Error::LengthMismatch {
                expected: x_labels.len(),
                got: cells.len(),
            });
        }
        for row in &cells {
            if row.len() != y_labels.len() {
                return Err(Error::LengthMismatch {
                    expected: y_labels.len(),
                    got: row.len(),
                });
            }
        }
        let total: Rational = cells.iter().flatten().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized {
                total: total.to_string(),
            });
        }
        Ok(JointDistribution {
            x_labels,
            y_labels,
            cells,
        })
    }

    /// Independent product `dx (x) dy`.
    pub fn product(dx: &Distribution, dy: &Distribution) -> Self {
        let cells = dx
            .probs()
            .iter()
            .map(|px| dy.probs().iter().map(|py| px * py).collect())
            .collect();
        JointDistribution::new(dx.support().to_vec(), dy.support().to_vec(), cells)
            .expect("product of valid distributions is valid")
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn cell(&self, i: usize, j: usize) -> &Rational {
        &self.cells[i][j]
    }

    /// Transposed copy (swap the roles of X and Y).
    pub fn transposed(&self) -> JointDistribution {
        let cells = (0..self.y_labels.len())
            .map(|j| (0..self.x_labels.len()).map(|i| self.cells[i][j].clone()).collect())
            .collect();
        JointDistribution {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            cells,
        }
    }

    /// Sum out the other variable, leaving the distribution of `axis`.
    pub fn marginal(&self, axis: Axis) -> Distribution {
        let (labels, probs): (Vec<String>, Vec<Rational>) = match axis {
            Axis::X => (
                self.x_labels.clone(),
                self.cells.iter().map(|row| row.iter().sum()).collect(),
            ),
            Axis::Y => (
                self.y_labels.clone(),
                (0..self.y_labels.len())
                    .map(|j| self.cells.iter().map(|row| &row[j]).sum())
                    .collect(),
            ),
        };
        Distribution::new(labels, probs).expect("marginal of a valid joint sums to 1")
    }

    fn joint_entropy_nats(&self) -> f64 {
        kahan_sum(self.cells.iter().flatten().map(|p| {
            if p.is_zero() || p.is_one() {
                0.0
            } else {
                -p.to_f64() * p.ln()
            }
        }))
    }

    /// Entropy of the joint variable `(X, Y)`.
    pub fn entropy(&self, unit: LogUnit) -> f64 {
        unit.from_nats(self.joint_entropy_nats())
    }

    /// Conditional entropy of the *other* variable given `given`.
    ///
    /// Computed by the chain rule `H(X|Y) = H(X,Y) - H(Y)` and cross-checked
    /// against the conditional entropy theorem
    /// `H(X|Y) = sum_y P(y) H(X | Y=y)`; disagreement beyond tolerance is a
    /// bug in the arithmetic, not a data condition, so it panics.
    pub fn conditional_entropy(&self, given: Axis, unit: LogUnit) -> f64 {
        let chain = self.joint_entropy_nats() - entropy_nats(self.marginal(given).probs());
        let theorem = self.conditional_entropy_by_theorem_nats(given);
        assert!(
            (chain - theorem).abs() < FLOAT_TOL,
            "conditional entropy routes disagree: chain={chain}, theorem={theorem}"
        );
        unit.from_nats(chain)
    }

    /// Independent route: expected conditional-slice entropy.
    fn conditional_entropy_by_theorem_nats(&self, given: Axis) -> f64 {
        let j = match given {
            Axis::Y => self.clone(),
            Axis::X => self.transposed(),
        };
        // now conditioning on j's Y axis
        let marg = j.marginal(Axis::Y);
        let mut total = KahanSum::default();
        for (jy, py) in marg.probs().iter().enumerate() {
            if py.is_zero() {
                continue;
            }
            let slice_entropy = kahan_sum(j.cells.iter().map(|row| {
                let c = &row[jy];
                if c.is_zero() {
                    0.0
                } else {
                    let cond = c / py;
                    -cond.to_f64() * cond.ln()
                }
            }));
            total.add(py.to_f64() * slice_entropy);
        }
        total.total()
    }

    fn mutual_information_nats(&self) -> f64 {
        let hx = entropy_nats(self.marginal(Axis::X).probs());
        let hy = entropy_nats(self.marginal(Axis::Y).probs());
        let hxy = self.joint_entropy_nats();
        let mi = hx + hy - hxy;
        // independent route: sum p(x,y) log( p(x,y) / (p(x) p(y)) )
        let px = self.marginal(Axis::X);
        let py = self.marginal(Axis::Y);
        let kl = kahan_sum(
            self.cells
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| (i, j, c)))
                .map(|(i, j, c)| {
                    if c.is_zero() {
                        0.0
                    } else {
                        let denom = &px.probs()[i] * &py.probs()[j];
                        c.to_f64() * (c / &denom).ln()
                    }
                }),
        );
        assert!(
            (mi - kl).abs() < FLOAT_TOL,
            "mutual information routes disagree: entropies={mi}, divergence={kl}"
        );
        assert!(mi > -FLOAT_TOL, "mutual information {mi} below zero");
        mi
    }

    /// Mutual information `I(X;Y) = H(X) + H(Y) - H(X,Y)`.
    pub fn mutual_information(&self, unit: LogUnit) -> f64 {
        unit.from_nats(self.mutual_information_nats())
    }

    /// Independent entropy of `of`: the part of its entropy not shared with
    /// the other variable, `S_ind(Y) = H(Y) - I(X;Y) = H(Y|X)`.
    pub fn independent_entropy(&self, of: Axis, unit: LogUnit) -> f64 {
        let conditional = self.conditional_entropy(of.other(), LogUnit::Nat);
        let subtraction =
            entropy_nats(self.marginal(of).probs()) - self.mutual_information_nats();
        assert!(
            (conditional - subtraction).abs() < FLOAT_TOL,
            "independent entropy routes disagree: {conditional} vs {subtraction}"
        );
        unit.from_nats(conditional)
    }
}

impl std::fmt::Debug for JointDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "JointDistribution x={:?} y={:?}", self.x_labels, self.y_labels)?;
        for row in &self.cells {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}
