use super::graph::UndirectedGraph;
use super::ordering::{mcs_order, EliminationOrdering};
use crate::error::{Error, Result};

/// Runs the elimination game from the back of `ord`, connecting every pair of
/// earlier neighbors of each node. Returns the filled graph and the number of
/// edges added.
pub fn fill_in(g: &UndirectedGraph, ord: &EliminationOrdering) -> (UndirectedGraph, usize) {
    let pos = ord.positions();
    let mut filled = g.clone();
    let mut added = 0;
    for &v in ord.order.iter().rev() {
        let earlier: Vec<usize> = filled
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| pos[w] < pos[v])
            .collect();
        for (i, &a) in earlier.iter().enumerate() {
            for &b in &earlier[i + 1..] {
                if filled.add_edge(a, b) {
                    added += 1;
                }
            }
        }
    }
    (filled, added)
}

/// True when every node's earlier neighbors under `ord` are pairwise adjacent.
pub fn is_perfect_elimination_ordering(g: &UndirectedGraph, ord: &EliminationOrdering) -> bool {
    let pos = ord.positions();
    ord.order.iter().all(|&v| {
        let earlier: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| pos[w] < pos[v])
            .collect();
        g.is_complete_subset(&earlier)
    })
}

/// Chordality test: a graph is chordal iff an MCS ordering is a perfect
/// elimination ordering.
pub fn is_chordal(g: &UndirectedGraph) -> bool {
    g.is_empty() || is_perfect_elimination_ordering(g, &mcs_order(g, 0))
}

/// Maximal cliques of a graph triangulated along `ord`.
///
/// Node `v` proposes `{v} ∪ earlier neighbors`; proposals contained in another
/// are dropped. Cliques come back sorted, in the rank order of the node that
/// proposed them.
pub fn identify_cliques(
    tg: &UndirectedGraph,
    ord: &EliminationOrdering,
) -> Result<Vec<Vec<usize>>> {
    let pos = ord.positions();
    let candidates: Vec<Vec<usize>> = ord
        .order
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = tg
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| pos[w] < pos[v])
                .collect();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();

    for c in &candidates {
        if !tg.is_complete_subset(c) {
            return Err(Error::Structural(format!(
                "candidate clique {c:?} is not complete; graph is not triangulated by this ordering"
            )));
        }
    }

    // In a perfect elimination ordering a candidate can only be contained in
    // a candidate proposed by a later node.
    let mut cliques = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates[i + 1..].iter().any(|d| is_subset(c, d));
        if !dominated {
            cliques.push(c.clone());
        }
    }
    Ok(cliques)
}

/// Both slices sorted ascending.
pub(crate) fn is_subset(small: &[usize], large: &[usize]) -> bool {
    let mut it = large.iter();
    small.iter().all(|x| it.any(|y| y == x))
}
