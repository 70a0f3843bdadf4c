//! Exact inference by two-pass message passing over a join tree
//! (multiply / marginalize / divide separator updates).

mod potential;

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::net::{BeliefNetwork, Evidence, EvidenceMask, Marginals};
use crate::reformulation::JoinTree;

pub use potential::Potential;

/// Calibrated clique and separator potentials. Every clique table sums to
/// `normalization`, the probability of the evidence.
#[derive(Debug, Clone)]
pub struct CalibratedTree {
    pub tree: JoinTree,
    pub cliques: Vec<Potential>,
    pub separators: Vec<Potential>,
    pub normalization: f64,
}

/// Multiplies each CPT into the lowest-indexed clique containing its family.
pub fn assign_potentials(net: &BeliefNetwork, tree: &JoinTree) -> Result<Vec<Potential>> {
    let cards = net.cardinalities();
    let mut pots: Vec<Potential> = tree
        .cliques
        .iter()
        .map(|c| Potential::ones(c.clone(), c.iter().map(|&v| cards[v]).collect()))
        .collect();
    for v in 0..net.len() {
        let family = net.family(v);
        let home = tree
            .cliques
            .iter()
            .position(|c| family.iter().all(|x| c.binary_search(x).is_ok()))
            .ok_or_else(|| {
                Error::Structural(format!(
                    "family of variable {v} is not covered by any clique"
                ))
            })?;
        let fcards = family.iter().map(|&x| cards[x]).collect();
        pots[home].multiply_in(&Potential::new(family, fcards, net.cpts[v].clone()));
    }
    Ok(pots)
}

/// Enters evidence and calibrates the tree (collect to clique 0, then
/// distribute). Execution time comes from `clock`.
pub fn propagate(
    potentials: Vec<Potential>,
    tree: &JoinTree,
    mask: &EvidenceMask,
    clock: &mut Clock,
) -> Result<(CalibratedTree, f64)> {
    let (out, t_e) = clock.time_execution(tree.estimate, || calibrate(potentials, tree, mask));
    Ok((out?, t_e))
}

fn calibrate(
    mut pots: Vec<Potential>,
    tree: &JoinTree,
    mask: &EvidenceMask,
) -> Result<CalibratedTree> {
    for (v, allowed) in mask.allowed.iter().enumerate() {
        if !mask.is_observed(v) {
            continue;
        }
        if let Some(c) = tree
            .cliques
            .iter()
            .position(|c| c.binary_search(&v).is_ok())
        {
            pots[c].restrict(v, allowed);
        }
    }

    let mut seps: Vec<Potential> = tree
        .edges
        .iter()
        .map(|e| {
            let cards = e
                .separator
                .iter()
                .map(|v| {
                    let c = &pots[e.a];
                    c.cards[c
                        .scope
                        .iter()
                        .position(|w| w == v)
                        .expect("separator in clique")]
                })
                .collect();
            Potential::ones(e.separator.clone(), cards)
        })
        .collect();

    // BFS from clique 0; (clique, parent clique, edge to parent)
    let adj = tree.adjacency();
    let k = tree.cliques.len();
    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    if k > 0 {
        let mut queue = VecDeque::from([(0usize, usize::MAX, usize::MAX)]);
        seen[0] = true;
        while let Some((c, parent, edge)) = queue.pop_front() {
            order.push((c, parent, edge));
            for &(d, e) in &adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back((d, c, e));
                }
            }
        }
    }
    if order.len() != k {
        return Err(Error::Structural("join tree is not connected".into()));
    }

    let pass =
        |pots: &mut Vec<Potential>, seps: &mut Vec<Potential>, from: usize, to: usize, e: usize| {
            let fresh = pots[from].marginalize(&seps[e].scope);
            let update = fresh.ratio(&seps[e]);
            pots[to].multiply_in(&update);
            seps[e] = fresh;
        };

    for &(c, parent, e) in order.iter().rev() {
        if parent != usize::MAX {
            pass(&mut pots, &mut seps, c, parent, e);
        }
    }
    let normalization = if k > 0 { pots[0].total() } else { 1.0 };
    if !(normalization > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    for &(c, parent, e) in &order {
        if parent != usize::MAX {
            pass(&mut pots, &mut seps, parent, c, e);
        }
    }

    Ok(CalibratedTree {
        tree: tree.clone(),
        cliques: pots,
        separators: seps,
        normalization,
    })
}

/// Posterior of every variable, read from the smallest clique containing it.
pub fn all_marginals(cal: &CalibratedTree) -> Marginals {
    let n = cal
        .tree
        .cliques
        .iter()
        .flatten()
        .max()
        .map_or(0, |&m| m + 1);
    let distributions = (0..n)
        .map(|v| {
            let home = cal
                .cliques
                .iter()
                .filter(|p| p.scope.binary_search(&v).is_ok())
                .min_by_key(|p| p.table.len())
                .expect("every variable lies in some clique");
            let m = home.marginalize(&[v]);
            let s = m.total();
            m.table.iter().map(|x| x / s).collect()
        })
        .collect();
    Marginals {
        distributions,
        evidence_probability: cal.normalization,
    }
}

impl CalibratedTree {
    /// Largest disagreement between the two sides of any separator, on the
    /// normalized scale.
    pub fn max_separator_residual(&self) -> f64 {
        self.tree
            .edges
            .iter()
            .map(|e| {
                let a = self.cliques[e.a].marginalize(&e.separator);
                let b = self.cliques[e.b].marginalize(&e.separator);
                a.table
                    .iter()
                    .zip(&b.table)
                    .map(|(x, y)| (x - y).abs() / self.normalization)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Assign, enter evidence, propagate and read off all marginals. Returns the
/// marginals and the execution time reported by `clock`.
pub fn infer(
    net: &BeliefNetwork,
    tree: &JoinTree,
    ev: &Evidence,
    clock: &mut Clock,
) -> Result<(Marginals, f64)> {
    let mask = ev.mask(net)?;
    let pots = assign_potentials(net, tree)?;
    let (cal, t_e) = propagate(pots, tree, &mask, clock)?;
    Ok((all_marginals(&cal), t_e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub variable: String,
    pub state: usize,
    pub probability: f64,
}

pub fn marginal_rows(net: &BeliefNetwork, m: &Marginals) -> Vec<MarginalRow> {
    m.distributions
        .iter()
        .enumerate()
        .flat_map(|(v, d)| {
            d.iter().enumerate().map(move |(s, &p)| MarginalRow {
                variable: net.variables[v].name.clone(),
                state: s,
                probability: p,
            })
        })
        .collect()
}

pub fn write_marginals_csv(rows: &[MarginalRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_marginals_csv(input: impl Read) -> Result<Vec<MarginalRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}
