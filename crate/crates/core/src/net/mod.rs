//! Discrete belief networks: representation, validation, evidence, random
//! generation, file I/O and the brute-force joint-distribution oracle.

mod generate;
mod io;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_random, GeneratorParams};
pub use io::{read_network, write_network};
pub use oracle::{oracle_marginals, oracle_marginals_masked, Marginals, DEFAULT_JOINT_CAP};

/// Tolerance on CPT row sums accepted by [`validate`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: usize,
    pub name: String,
    pub cardinality: usize,
}

/// A DAG of discrete variables with one conditional probability table each.
///
/// `cpts[v]` is stored row-major: row `r` is the distribution of `v` given the
/// parent configuration whose mixed-radix index is `r` (first listed parent
/// most significant, last listed parent least significant), so entry
/// `cpts[v][r * card(v) + s]` is `P(v = s | parents = config r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNetwork {
    pub variables: Vec<Variable>,
    pub parents: Vec<Vec<usize>>,
    pub cpts: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    IdNotDense,
    Cardinality,
    ParentOutOfRange,
    DuplicateParent,
    Acyclicity,
    CptDimension,
    NegativeProbability,
    RowSum,
    Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Offending variable; `None` for network-wide shape problems.
    pub variable: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, variable: Option<usize>, kind: ViolationKind, message: String) {
        self.violations.push(Violation {
            variable,
            kind,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v.variable {
                Some(id) => write!(f, "variable {id}: {}", v.message)?,
                None => f.write_str(&v.message)?,
            }
        }
        Ok(())
    }
}

/// Checks every structural and numerical invariant of `net`. Problems are
/// reported, never raised.
pub fn validate(net: &BeliefNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = net.variables.len();

    if net.parents.len() != n || net.cpts.len() != n {
        report.push(
            None,
            ViolationKind::Shape,
            format!(
                "{} variables but {} parent lists and {} cpts",
                n,
                net.parents.len(),
                net.cpts.len()
            ),
        );
        return report;
    }

    for (i, var) in net.variables.iter().enumerate() {
        if var.id != i {
            report.push(
                Some(i),
                ViolationKind::IdNotDense,
                format!("id {} at position {i}", var.id),
            );
        }
        if var.cardinality < 2 {
            report.push(
                Some(i),
                ViolationKind::Cardinality,
                format!("cardinality {} < 2", var.cardinality),
            );
        }
    }

    let mut parents_ok = true;
    for (i, ps) in net.parents.iter().enumerate() {
        for (k, &p) in ps.iter().enumerate() {
            if p >= n || p == i {
                parents_ok = false;
                report.push(
                    Some(i),
                    ViolationKind::ParentOutOfRange,
                    format!("parent id {p} is not another variable"),
                );
            } else if ps[..k].contains(&p) {
                report.push(
                    Some(i),
                    ViolationKind::DuplicateParent,
                    format!("parent {p} listed twice"),
                );
            }
        }
    }

    if parents_ok {
        for v in cyclic_variables(&net.parents) {
            report.push(
                Some(v),
                ViolationKind::Acyclicity,
                "acyclicity: variable lies on a directed cycle".to_string(),
            );
        }
    }

    if !parents_ok || report.has(ViolationKind::Cardinality) {
        return report;
    }

    for v in 0..n {
        let card = net.variables[v].cardinality;
        let rows: usize = net.parents[v]
            .iter()
            .map(|&p| net.variables[p].cardinality)
            .product();
        let cpt = &net.cpts[v];
        if cpt.len() != rows * card {
            report.push(
                Some(v),
                ViolationKind::CptDimension,
                format!(
                    "cpt has {} entries, expected {} rows x {} states",
                    cpt.len(),
                    rows,
                    card
                ),
            );
            continue;
        }
        for (r, row) in cpt.chunks(card).enumerate() {
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                report.push(
                    Some(v),
                    ViolationKind::NegativeProbability,
                    format!("row {r} has a negative or non-finite entry"),
                );
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                report.push(
                    Some(v),
                    ViolationKind::RowSum,
                    format!("row {r}: row sum {sum} ≠ 1"),
                );
            }
        }
    }
    report
}

/// Kahn's algorithm; variables on or downstream of a cycle are left out.
fn topological_prefix(parents: &[Vec<usize>]) -> Vec<usize> {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (v, ps) in parents.iter().enumerate() {
        indegree[v] = ps.len();
        for &p in ps {
            children[p].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = stack.pop() {
        order.push(v);
        for &c in children[v].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                stack.push(c);
            }
        }
    }
    order
}

/// Variables that cannot be topologically ordered.
fn cyclic_variables(parents: &[Vec<usize>]) -> Vec<usize> {
    let mut done = vec![false; parents.len()];
    for v in topological_prefix(parents) {
        done[v] = true;
    }
    (0..parents.len()).filter(|&v| !done[v]).collect()
}

impl BeliefNetwork {
    /// Builds a network and validates it.
    pub fn new(
        variables: Vec<Variable>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let net = BeliefNetwork {
            variables,
            parents,
            cpts,
        };
        net.check()?;
        Ok(net)
    }

    pub fn check(&self) -> Result<()> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(report))
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.variables[v].cardinality
    }

    /// `{v} ∪ parents(v)`, parents first in their listed order, `v` last.
    pub fn family(&self, v: usize) -> Vec<usize> {
        let mut f = self.parents[v].clone();
        f.push(v);
        f
    }

    pub fn variable_by_name(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

/// Hard observations: variable id → observed state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub assignments: BTreeMap<usize, usize>,
}

impl Evidence {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Evidence {
            assignments: pairs.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn check(&self, net: &BeliefNetwork) -> Result<()> {
        for (&v, &s) in &self.assignments {
            if v >= net.len() {
                return Err(Error::InvalidEvidence(format!("unknown variable {v}")));
            }
            if s >= net.cardinality(v) {
                return Err(Error::InvalidEvidence(format!(
                    "state {s} out of range for variable {v} (cardinality {})",
                    net.cardinality(v)
                )));
            }
        }
        Ok(())
    }

    /// Forward-samples a full configuration and reveals each variable with
    /// probability `observe_prob`; the result always has positive probability.
    pub fn sample(net: &BeliefNetwork, observe_prob: f64, seed: u64) -> Evidence {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        let mut states = vec![0usize; net.len()];
        let mut assignments = BTreeMap::new();
        for v in topological_prefix(&net.parents) {
            let card = net.cardinality(v);
            let row = net.parents[v]
                .iter()
                .fold(0, |r, &p| r * net.cardinality(p) + states[p]);
            let probs = &net.cpts[v][row * card..(row + 1) * card];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            states[v] = (0..card)
                .find(|&k| {
                    acc += probs[k];
                    u < acc && probs[k] > 0.0
                })
                .unwrap_or_else(|| (0..card).rev().find(|&k| probs[k] > 0.0).unwrap_or(0));
            if rng.random_bool(observe_prob) {
                assignments.insert(v, states[v]);
            }
        }
        Evidence { assignments }
    }

    /// Per-variable allowed-state indicators induced by the observations.
    pub fn mask(&self, net: &BeliefNetwork) -> Result<EvidenceMask> {
        self.check(net)?;
        let mut mask = EvidenceMask::vacuous(net);
        for (&v, &s) in &self.assignments {
            for (k, allowed) in mask.allowed[v].iter_mut().enumerate() {
                *allowed = k == s;
            }
        }
        Ok(mask)
    }
}

/// Evidence as allowed-state sets, one per variable. A variable whose states
/// are all allowed is unobserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceMask {
    pub allowed: Vec<Vec<bool>>,
}

impl EvidenceMask {
    pub fn vacuous(net: &BeliefNetwork) -> Self {
        EvidenceMask {
            allowed: net
                .variables
                .iter()
                .map(|v| vec![true; v.cardinality])
                .collect(),
        }
    }

    pub fn is_observed(&self, v: usize) -> bool {
        self.allowed[v].iter().any(|a| !a)
    }
}
