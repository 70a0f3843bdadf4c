use super::{BeliefNetwork, Evidence, EvidenceMask};
use crate::error::{Error, Result};

/// Largest joint table the oracle will enumerate.
pub const DEFAULT_JOINT_CAP: u64 = 1 << 24;

/// Posterior marginals for every variable plus the probability of the
/// evidence they were conditioned on.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub distributions: Vec<Vec<f64>>,
    pub evidence_probability: f64,
}

/// Exact posteriors by enumerating the full joint distribution.
pub fn oracle_marginals(net: &BeliefNetwork, ev: &Evidence) -> Result<Marginals> {
    oracle_marginals_masked(net, &ev.mask(net)?, DEFAULT_JOINT_CAP)
}

/// Enumerates every joint configuration, drops those excluded by `mask`,
/// sums the remaining mass per variable state and renormalizes.
pub fn oracle_marginals_masked(
    net: &BeliefNetwork,
    mask: &EvidenceMask,
    cap: u64,
) -> Result<Marginals> {
    let cards = net.cardinalities();
    let cells: u128 = cards.iter().map(|&c| c as u128).product();
    if cells > cap as u128 {
        return Err(Error::JointTooLarge { cells, cap });
    }

    let n = cards.len();
    let mut acc: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut total = 0.0;
    let mut state = vec![0usize; n];

    'outer: loop {
        if (0..n).all(|v| mask.allowed[v][state[v]]) {
            let mut p = 1.0;
            for v in 0..n {
                let row = net.parents[v]
                    .iter()
                    .fold(0usize, |r, &q| r * cards[q] + state[q]);
                p *= net.cpts[v][row * cards[v] + state[v]];
            }
            if p > 0.0 {
                total += p;
                for v in 0..n {
                    acc[v][state[v]] += p;
                }
            }
        }
        // odometer, last variable fastest
        for v in (0..n).rev() {
            state[v] += 1;
            if state[v] < cards[v] {
                continue 'outer;
            }
            state[v] = 0;
        }
        break;
    }

    if total <= 0.0 {
        return Err(Error::InconsistentEvidence);
    }
    let distributions = acc
        .into_iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            row.into_iter().map(|x| x / s).collect()
        })
        .collect();
    Ok(Marginals {
        distributions,
        evidence_probability: total,
    })
}
