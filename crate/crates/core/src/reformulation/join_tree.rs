use std::fmt;

use serde::{Deserialize, Serialize};

use super::triangulate::is_subset;
use crate::error::{Error, Result};

const ESTIMATE_LIMIT: u64 = 1 << 63;

/// Sum over cliques of the product of member cardinalities, in joint
/// state-space cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuntimeEstimate(pub u64);

impl RuntimeEstimate {
    pub fn cells(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for RuntimeEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinTree {
    pub cliques: Vec<Vec<usize>>,
    pub edges: Vec<TreeEdge>,
    pub estimate: RuntimeEstimate,
}

/// Exact state-space size of one set of variables; `None` past 2^63.
pub(crate) fn state_space(members: &[usize], cardinalities: &[usize]) -> Option<u64> {
    members
        .iter()
        .try_fold(1u64, |acc, &v| acc.checked_mul(cardinalities[v] as u64))
        .filter(|&x| x <= ESTIMATE_LIMIT)
}

fn clique_sum(cliques: &[Vec<usize>], cardinalities: &[usize]) -> Result<RuntimeEstimate> {
    cliques
        .iter()
        .try_fold(0u64, |acc, c| {
            state_space(c, cardinalities).and_then(|s| acc.checked_add(s))
        })
        .filter(|&x| x <= ESTIMATE_LIMIT)
        .map(RuntimeEstimate)
        .ok_or(Error::EstimateOverflow)
}

/// Recomputes a tree's runtime estimate from its cliques.
pub fn estimate_runtime(tree: &JoinTree, cardinalities: &[usize]) -> Result<RuntimeEstimate> {
    clique_sum(&tree.cliques, cardinalities)
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .copied()
        .filter(|x| b.binary_search(x).is_ok())
        .collect()
}

/// Maximum-weight spanning tree over the clique graph, weighting each pair by
/// separator size, then separator state-space size, then lower indices.
/// Pairs with empty separators are allowed so disconnected networks still
/// get a single tree.
pub fn build_join_tree(cliques: Vec<Vec<usize>>, cardinalities: &[usize]) -> Result<JoinTree> {
    let estimate = clique_sum(&cliques, cardinalities)?;
    let k = cliques.len();

    let mut candidates = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let sep = intersection(&cliques[i], &cliques[j]);
            let weight = state_space(&sep, cardinalities).unwrap_or(u64::MAX);
            candidates.push((sep.len(), weight, i, j, sep));
        }
    }
    candidates.sort_by(|x, y| {
        y.0.cmp(&x.0)
            .then(y.1.cmp(&x.1))
            .then(x.2.cmp(&y.2))
            .then(x.3.cmp(&y.3))
    });

    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    for (_, _, i, j, sep) in candidates {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            edges.push(TreeEdge {
                a: i,
                b: j,
                separator: sep,
            });
            if edges.len() + 1 == k {
                break;
            }
        }
    }
    if k > 0 && edges.len() + 1 != k {
        return Err(Error::Structural(
            "clique graph could not be spanned".into(),
        ));
    }
    Ok(JoinTree {
        cliques,
        edges,
        estimate,
    })
}

impl JoinTree {
    /// Clique adjacency lists: `(neighbor clique, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.cliques.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            adj[edge.a].push((edge.b, e));
            adj[edge.b].push((edge.a, e));
        }
        adj
    }

    /// Cliques on the tree path from `from` to `to`, inclusive.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.cliques.len()];
        prev[from] = from;
        let mut stack = vec![from];
        while let Some(c) = stack.pop() {
            for &(d, _) in &adj[c] {
                if prev[d] == usize::MAX {
                    prev[d] = c;
                    stack.push(d);
                }
            }
        }
        if prev[to] == usize::MAX {
            return None;
        }
        let mut path = vec![to];
        let mut c = to;
        while c != from {
            c = prev[c];
            path.push(c);
        }
        path.reverse();
        Some(path)
    }

    /// Exhaustively checks the tree shape, separators, non-nesting and the
    /// running intersection property. Returns a description of the first
    /// failure.
    pub fn verify(&self, cardinalities: &[usize]) -> std::result::Result<(), String> {
        let k = self.cliques.len();
        if k > 0 && self.edges.len() != k - 1 {
            return Err(format!("{} edges for {} cliques", self.edges.len(), k));
        }
        for e in &self.edges {
            if e.separator != intersection(&self.cliques[e.a], &self.cliques[e.b]) {
                return Err(format!(
                    "separator of edge {}–{} is not the intersection",
                    e.a, e.b
                ));
            }
        }
        for i in 0..k {
            for j in 0..k {
                if i != j && is_subset(&self.cliques[i], &self.cliques[j]) {
                    return Err(format!("clique {i} is contained in clique {j}"));
                }
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                let path = self
                    .path(i, j)
                    .ok_or_else(|| format!("cliques {i} and {j} disconnected"))?;
                let shared = intersection(&self.cliques[i], &self.cliques[j]);
                if let Some(&c) = path
                    .iter()
                    .find(|&&c| !is_subset(&shared, &self.cliques[c]))
                {
                    return Err(format!(
                        "running intersection fails: {shared:?} from cliques {i},{j} missing in clique {c}"
                    ));
                }
            }
        }
        match clique_sum(&self.cliques, cardinalities) {
            Ok(e) if e == self.estimate => Ok(()),
            Ok(e) => Err(format!(
                "stored estimate {} but cliques sum to {}",
                self.estimate, e
            )),
            Err(err) => Err(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond_tree() {
        let tree = build_join_tree(vec![vec![0, 1, 2], vec![1, 2, 3]], &[2; 4]).unwrap();
        assert_eq!(
            tree.edges,
            vec![TreeEdge {
                a: 0,
                b: 1,
                separator: vec![1, 2]
            }]
        );
        assert_eq!(tree.estimate, RuntimeEstimate(16));
        assert!(tree.verify(&[2; 4]).is_ok());
    }

    #[test]
    fn single_clique_has_no_edges() {
        let tree = build_join_tree(vec![vec![0]], &[2]).unwrap();
        assert!(tree.edges.is_empty());
        assert_eq!(tree.estimate, RuntimeEstimate(2));
    }

    #[test]
    fn chain_of_cliques() {
        let tree = build_join_tree(vec![vec![0, 1], vec![1, 2], vec![2, 3]], &[2; 4]).unwrap();
        assert_eq!(tree.estimate, RuntimeEstimate(12));
        let seps: Vec<_> = tree.edges.iter().map(|e| e.separator.clone()).collect();
        assert_eq!(seps, vec![vec![1], vec![2]]);
        assert!(tree.verify(&[2; 4]).is_ok());
    }

    #[test]
    fn thirty_binary_clique() {
        let clique: Vec<usize> = (0..30).collect();
        let tree = build_join_tree(vec![clique], &[2; 30]).unwrap();
        assert_eq!(
            estimate_runtime(&tree, &[2; 30]).unwrap(),
            RuntimeEstimate(1 << 30)
        );
    }

    #[test]
    fn overflow_is_refused() {
        let clique: Vec<usize> = (0..33).collect();
        let err = build_join_tree(vec![clique], &[4; 33]).unwrap_err();
        assert!(matches!(err, Error::EstimateOverflow));
        // exactly 2^63 is still representable
        let clique: Vec<usize> = (0..63).collect();
        let tree = build_join_tree(vec![clique], &[2; 63]).unwrap();
        assert_eq!(tree.estimate.cells(), 1 << 63);
    }

    #[test]
    fn disjoint_cliques_join_through_empty_separator() {
        let tree = build_join_tree(vec![vec![0, 1], vec![2]], &[2; 3]).unwrap();
        assert_eq!(tree.edges.len(), 1);
        assert!(tree.edges[0].separator.is_empty());
        assert!(tree.verify(&[2; 3]).is_ok());
    }

    #[test]
    fn verify_catches_broken_running_intersection() {
        // {0,1}–{2,3}–{1,2}: variable 1 skips the middle clique
        let tree = JoinTree {
            cliques: vec![vec![0, 1], vec![2, 3], vec![1, 2]],
            edges: vec![
                TreeEdge {
                    a: 0,
                    b: 1,
                    separator: vec![],
                },
                TreeEdge {
                    a: 1,
                    b: 2,
                    separator: vec![2],
                },
            ],
            estimate: RuntimeEstimate(12),
        };
        assert!(tree
            .verify(&[2; 4])
            .unwrap_err()
            .contains("running intersection"));
    }
}
