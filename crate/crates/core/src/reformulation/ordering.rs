//! Elimination orderings.
//!
//! An [`EliminationOrdering`] lists nodes by rank. Triangulation eliminates
//! from the back: the last node is eliminated first, and a node's "earlier"
//! neighbors are the ones it is connected to when it is eliminated.

use rand::seq::IndexedRandom;

use super::graph::UndirectedGraph;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrdering {
    pub order: Vec<usize>,
}

impl EliminationOrdering {
    /// Rank of every node: `positions()[order[i]] == i`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    pub fn is_permutation_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.order.len() == n
            && self
                .order
                .iter()
                .all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
    }
}

/// How K-search resolves ties between equally good candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    LowestId,
    Seeded(u64),
}

/// Maximum cardinality search: numbers `start` first, then repeatedly the
/// unnumbered node with the most numbered neighbors (lowest id on ties).
pub fn mcs_order(g: &UndirectedGraph, start: usize) -> EliminationOrdering {
    let n = g.len();
    assert!(start < n, "start node {start} out of range for {n} nodes");
    let mut numbered = vec![false; n];
    let mut weight = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut next = start;
    loop {
        numbered[next] = true;
        order.push(next);
        for &w in g.neighbors(next) {
            weight[w] += 1;
        }
        let Some(best) = (0..n)
            .filter(|&v| !numbered[v])
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if weight[b] >= weight[v] => Some(b),
                _ => Some(v),
            })
        else {
            break;
        };
        next = best;
    }
    EliminationOrdering { order }
}

/// Kjærulff-style greedy elimination.
///
/// Each step eliminates a simplicial node if one exists, otherwise the node
/// minimizing the state-space size of itself plus its remaining neighbors.
/// The eliminated node's neighbors are connected and the node removed. The
/// returned ordering is the reverse of the elimination sequence.
pub fn k_search_order(
    g: &UndirectedGraph,
    cardinalities: &[usize],
    tie_break: TieBreak,
) -> EliminationOrdering {
    let n = g.len();
    let mut work = g.clone();
    let mut alive = vec![true; n];
    let mut rng = match tie_break {
        TieBreak::Seeded(s) => Some(seed::rng(s)),
        TieBreak::LowestId => None,
    };
    let mut sequence = Vec::with_capacity(n);
    let mut ties = Vec::new();

    for _ in 0..n {
        ties.clear();
        for v in (0..n).filter(|&v| alive[v]) {
            let ns: Vec<usize> = work.neighbors(v).iter().copied().collect();
            if work.is_complete_subset(&ns) {
                ties.push(v);
            }
        }
        if ties.is_empty() {
            let mut best = u128::MAX;
            for v in (0..n).filter(|&v| alive[v]) {
                let cost = work
                    .neighbors(v)
                    .iter()
                    .fold(cardinalities[v] as u128, |acc, &w| {
                        acc.saturating_mul(cardinalities[w] as u128)
                    });
                if cost < best {
                    best = cost;
                    ties.clear();
                }
                if cost == best {
                    ties.push(v);
                }
            }
        }
        let chosen = match rng.as_mut() {
            Some(r) => *ties.choose(r).expect("at least one live node"),
            None => ties[0],
        };

        let ns: Vec<usize> = work.neighbors(chosen).iter().copied().collect();
        for (i, &a) in ns.iter().enumerate() {
            for &b in &ns[i + 1..] {
                work.add_edge(a, b);
            }
        }
        work.remove_node(chosen);
        alive[chosen] = false;
        sequence.push(chosen);
    }
    sequence.reverse();
    EliminationOrdering { order: sequence }
}
