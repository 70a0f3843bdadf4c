//! Join-tree reformulation: moralize, order, fill in, collect cliques, link
//! them into a tree and score it by total clique state-space size. The
//! anytime search repeats that pipeline under randomized initial conditions
//! and keeps the cheapest tree found.

mod anytime;
mod graph;
mod join_tree;
mod ordering;
mod triangulate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::BeliefNetwork;

pub use anytime::{
    anytime_reformulate, read_trajectory_csv, write_trajectory_csv, AnytimeSearch, Budget,
    ReformulationState, TrajectoryPoint,
};
pub use graph::{moralize, UndirectedGraph};
pub use join_tree::{build_join_tree, estimate_runtime, JoinTree, RuntimeEstimate, TreeEdge};
pub use ordering::{k_search_order, mcs_order, EliminationOrdering, TieBreak};
pub use triangulate::{fill_in, identify_cliques, is_chordal, is_perfect_elimination_ordering};

/// Which ordering heuristic produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    KSearch(TieBreak),
    Mcs { start: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    KSearch,
    Mcs,
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::KSearch(_) => StrategyKind::KSearch,
            Strategy::Mcs { .. } => StrategyKind::Mcs,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::KSearch => "k_search",
            StrategyKind::Mcs => "mcs",
        })
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k_search" => Ok(StrategyKind::KSearch),
            "mcs" => Ok(StrategyKind::Mcs),
            other => Err(Error::Parse(format!("unknown strategy `{other}`"))),
        }
    }
}

/// One full pass of the reformulation pipeline.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub strategy: Strategy,
    pub ordering: EliminationOrdering,
    pub fill_edges: usize,
    pub tree: JoinTree,
}

/// Runs order → fill → cliques → join tree on an already-moralized graph.
pub fn run_pipeline(
    moral: &UndirectedGraph,
    cardinalities: &[usize],
    strategy: Strategy,
) -> Result<Candidate> {
    let ordering = match strategy {
        Strategy::KSearch(tb) => k_search_order(moral, cardinalities, tb),
        Strategy::Mcs { start } => mcs_order(moral, start),
    };
    let (filled, fill_edges) = fill_in(moral, &ordering);
    let cliques = identify_cliques(&filled, &ordering)?;
    let tree = build_join_tree(cliques, cardinalities)?;
    if tree.edges.iter().any(|e| e.separator.is_empty()) && moral.is_connected() {
        return Err(Error::Structural(
            "join tree of a connected network has an empty separator".into(),
        ));
    }
    Ok(Candidate {
        strategy,
        ordering,
        fill_edges,
        tree,
    })
}

/// The first tree found by lowest-id K-search; the default policy's tree.
pub fn default_tree(net: &BeliefNetwork) -> Result<JoinTree> {
    let moral = moralize(net);
    Ok(run_pipeline(
        &moral,
        &net.cardinalities(),
        Strategy::KSearch(TieBreak::LowestId),
    )?
    .tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::fixtures::diamond;

    #[test]
    fn diamond_pipeline_by_hand() {
        let net = diamond();
        let moral = moralize(&net);
        let c = run_pipeline(
            &moral,
            &net.cardinalities(),
            Strategy::KSearch(TieBreak::LowestId),
        )
        .unwrap();
        assert_eq!(c.fill_edges, 0);
        let mut cliques = c.tree.cliques.clone();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 1, 2], vec![1, 2, 3]]);
        assert_eq!(c.tree.edges.len(), 1);
        assert_eq!(c.tree.edges[0].separator, vec![1, 2]);
        assert_eq!(c.tree.estimate, RuntimeEstimate(16));
    }

    #[test]
    fn mcs_pipeline_on_diamond() {
        let net = diamond();
        let moral = moralize(&net);
        for start in 0..4 {
            let c = run_pipeline(&moral, &net.cardinalities(), Strategy::Mcs { start }).unwrap();
            assert_eq!(c.fill_edges, 0);
            assert_eq!(c.tree.estimate, RuntimeEstimate(16));
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for k in [StrategyKind::KSearch, StrategyKind::Mcs] {
            assert_eq!(k.to_string().parse::<StrategyKind>().unwrap(), k);
        }
    }
}
