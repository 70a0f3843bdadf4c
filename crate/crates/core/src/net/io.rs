use serde::{Deserialize, Serialize};

use super::{BeliefNetwork, Variable};
use crate::error::{Error, Result};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    version: u32,
    variables: Vec<Variable>,
    parents: Vec<Vec<usize>>,
    /// Per variable, one row per parent configuration.
    cpts: Vec<Vec<Vec<f64>>>,
}

/// Serializes a network as a version-1 JSON document.
pub fn write_network(net: &BeliefNetwork) -> Vec<u8> {
    let doc = NetworkDoc {
        version: FORMAT_VERSION,
        variables: net.variables.clone(),
        parents: net.parents.clone(),
        cpts: net
            .cpts
            .iter()
            .zip(&net.variables)
            .map(|(cpt, var)| {
                cpt.chunks(var.cardinality.max(1))
                    .map(<[f64]>::to_vec)
                    .collect()
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("network document serializes");
    out.push(b'\n');
    out
}

/// Parses and validates a network document.
pub fn read_network(bytes: &[u8]) -> Result<BeliefNetwork> {
    let doc: NetworkDoc = serde_json::from_slice(bytes)?;
    if doc.version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported network version {}",
            doc.version
        )));
    }
    let cpts = doc.cpts.into_iter().map(|rows| rows.concat()).collect();
    BeliefNetwork::new(doc.variables, doc.parents, cpts)
}
