use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{BeliefNetwork, Variable};
use crate::error::{Error, Result};
use crate::seed;

/// Parameters of the random network generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_nodes: usize,
    pub max_parents: usize,
    pub max_cardinality: usize,
    pub edge_density: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_nodes: 30,
            max_parents: 4,
            max_cardinality: 4,
            edge_density: 0.3,
        }
    }
}

/// Draws a random valid network.
///
/// Node `i` only takes parents among `0..i`; candidates are visited in a
/// random order and each is accepted with probability `edge_density` until
/// `max_parents` are chosen. CPT rows are uniform draws from the simplex.
pub fn generate_random(params: &GeneratorParams, seed: u64) -> Result<BeliefNetwork> {
    let GeneratorParams {
        n_nodes,
        max_parents,
        max_cardinality,
        edge_density,
    } = *params;
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("n_nodes must be at least 1".into()));
    }
    if max_cardinality < 2 {
        return Err(Error::InvalidArgument(
            "max_cardinality must be at least 2".into(),
        ));
    }
    if !(0.0..=1.0).contains(&edge_density) {
        return Err(Error::InvalidArgument(format!(
            "edge_density {edge_density} outside [0, 1]"
        )));
    }

    let mut rng = seed::rng(seed);
    let variables: Vec<Variable> = (0..n_nodes)
        .map(|id| Variable {
            id,
            name: format!("X{id}"),
            cardinality: rng.random_range(2..=max_cardinality),
        })
        .collect();

    let mut parents = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(&mut rng);
        let mut chosen = Vec::new();
        for c in candidates {
            if chosen.len() >= max_parents {
                break;
            }
            if rng.random_bool(edge_density) {
                chosen.push(c);
            }
        }
        chosen.sort_unstable();
        parents.push(chosen);
    }

    let cpts = (0..n_nodes)
        .map(|v| {
            let card = variables[v].cardinality;
            let rows: usize = parents[v]
                .iter()
                .map(|&p: &usize| variables[p].cardinality)
                .product();
            let mut table = Vec::with_capacity(rows * card);
            for _ in 0..rows {
                let draws: Vec<f64> = (0..card)
                    .map(|_| {
                        let x: f64 = Exp1.sample(&mut rng);
                        x.max(f64::MIN_POSITIVE)
                    })
                    .collect();
                let total: f64 = draws.iter().sum();
                table.extend(draws.iter().map(|x| x / total));
            }
            table
        })
        .collect();

    BeliefNetwork::new(variables, parents, cpts)
}
