use std::io::{Read, Write};

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    moralize, run_pipeline, JoinTree, RuntimeEstimate, Strategy, StrategyKind, TieBreak,
    UndirectedGraph,
};
use crate::clock::Clock;
use crate::error::Result;
use crate::net::BeliefNetwork;
use crate::seed;

/// Best-so-far state after each evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t_r_seconds: f64,
    pub best_estimate: u64,
    pub candidate_index: usize,
    pub strategy: StrategyKind,
}

#[derive(Debug, Clone)]
pub struct ReformulationState {
    pub elapsed_t_r: f64,
    pub best_tree: JoinTree,
    pub best_estimate: RuntimeEstimate,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// How long [`anytime_reformulate`] keeps searching.
pub enum Budget<'a> {
    /// Until the clock reaches this many seconds.
    Seconds(f64),
    /// While the callback returns true; consulted before every candidate
    /// after the first.
    Until(Box<dyn FnMut(&ReformulationState) -> bool + 'a>),
}

/// Flexible generate-and-test search over join trees.
///
/// Construction evaluates a lowest-id K-search candidate so a tree exists as
/// soon as possible. Later candidates alternate between seeded K-search and
/// MCS from a random start node; the phase of the alternation is seeded.
pub struct AnytimeSearch {
    moral: UndirectedGraph,
    cards: Vec<usize>,
    rng: ChaCha8Rng,
    phase: usize,
    evaluated: usize,
    state: ReformulationState,
}

impl AnytimeSearch {
    pub fn new(net: &BeliefNetwork, seed: u64, clock: &mut Clock) -> Result<Self> {
        let moral = moralize(net);
        let cards = net.cardinalities();
        let mut rng = seed::rng(seed);
        let phase = rng.random_range(0..2);

        let first = run_pipeline(&moral, &cards, Strategy::KSearch(TieBreak::LowestId))?;
        clock.charge_candidate();
        let t = clock.elapsed();
        let estimate = first.tree.estimate;
        let state = ReformulationState {
            elapsed_t_r: t,
            best_estimate: estimate,
            best_tree: first.tree,
            trajectory: vec![TrajectoryPoint {
                t_r_seconds: t,
                best_estimate: estimate.cells(),
                candidate_index: 0,
                strategy: StrategyKind::KSearch,
            }],
        };
        Ok(AnytimeSearch {
            moral,
            cards,
            rng,
            phase,
            evaluated: 1,
            state,
        })
    }

    pub fn state(&self) -> &ReformulationState {
        &self.state
    }

    pub fn into_state(self) -> ReformulationState {
        self.state
    }

    pub fn candidates_evaluated(&self) -> usize {
        self.evaluated
    }

    fn next_strategy(&mut self) -> Strategy {
        if (self.evaluated + self.phase).is_multiple_of(2) {
            Strategy::KSearch(TieBreak::Seeded(self.rng.next_u64()))
        } else {
            Strategy::Mcs {
                start: self.rng.random_range(0..self.cards.len()),
            }
        }
    }

    /// Evaluates one more candidate and updates the best-so-far record.
    pub fn step(&mut self, clock: &mut Clock) -> Result<()> {
        let strategy = self.next_strategy();
        let cand = run_pipeline(&self.moral, &self.cards, strategy)?;
        clock.charge_candidate();
        let t = clock.elapsed();
        if cand.tree.estimate < self.state.best_estimate {
            self.state.best_estimate = cand.tree.estimate;
            self.state.best_tree = cand.tree;
        }
        self.state.elapsed_t_r = t;
        self.state.trajectory.push(TrajectoryPoint {
            t_r_seconds: t,
            best_estimate: self.state.best_estimate.cells(),
            candidate_index: self.evaluated,
            strategy: strategy.kind(),
        });
        self.evaluated += 1;
        Ok(())
    }

    /// Steps until the clock reads at least `t_r` seconds.
    pub fn run_until(&mut self, clock: &mut Clock, t_r: f64) -> Result<()> {
        while clock.elapsed() < t_r {
            self.step(clock)?;
        }
        Ok(())
    }
}

pub fn anytime_reformulate(
    net: &BeliefNetwork,
    budget: Budget<'_>,
    seed: u64,
    clock: &mut Clock,
) -> Result<ReformulationState> {
    let mut search = AnytimeSearch::new(net, seed, clock)?;
    match budget {
        Budget::Seconds(t) => search.run_until(clock, t)?,
        Budget::Until(mut keep_going) => {
            while keep_going(search.state()) {
                search.step(clock)?;
            }
        }
    }
    Ok(search.into_state())
}

pub fn write_trajectory_csv(points: &[TrajectoryPoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(input: impl Read) -> Result<Vec<TrajectoryPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let points = r
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{SimConfig, TauSpec};
    use crate::net::fixtures::diamond;
    use crate::net::{generate_random, GeneratorParams};

    fn sim() -> Clock {
        Clock::simulated(
            SimConfig {
                candidate_cost: 0.05,
                tau: TauSpec::Fixed { tau: 1e-6 },
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn diamond_best_is_sixteen() {
        let state = anytime_reformulate(&diamond(), Budget::Seconds(1.0), 3, &mut sim()).unwrap();
        assert_eq!(state.best_estimate, RuntimeEstimate(16));
        assert_eq!(state.trajectory.len(), 20);
        assert_eq!(state.elapsed_t_r, 1.0);
    }

    #[test]
    fn trajectory_is_non_increasing_and_reproducible() {
        let net = generate_random(&GeneratorParams::default(), 8).unwrap();
        let a = anytime_reformulate(&net, Budget::Seconds(2.0), 5, &mut sim()).unwrap();
        let b = anytime_reformulate(&net, Budget::Seconds(2.0), 5, &mut sim()).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert!(a
            .trajectory
            .windows(2)
            .all(|w| w[1].best_estimate <= w[0].best_estimate));
        assert_eq!(a.best_tree.estimate, a.best_estimate);
        assert_eq!(a.trajectory[0].strategy, StrategyKind::KSearch);
        let kinds: Vec<_> = a.trajectory.iter().map(|p| p.strategy).collect();
        assert!(kinds.contains(&StrategyKind::Mcs));
    }

    #[test]
    fn callback_budget_stops_when_told() {
        let net = diamond();
        let mut calls = 0;
        let state = anytime_reformulate(
            &net,
            Budget::Until(Box::new(|s: &ReformulationState| {
                calls += 1;
                s.trajectory.len() < 5
            })),
            1,
            &mut sim(),
        )
        .unwrap();
        assert_eq!(state.trajectory.len(), 5);
        assert_eq!(calls, 5);
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let net = generate_random(&GeneratorParams::default(), 2).unwrap();
        let state = anytime_reformulate(&net, Budget::Seconds(0.5), 2, &mut sim()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&state.trajectory, &mut buf).unwrap();
        let header = std::str::from_utf8(&buf)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(header, "t_r_seconds,best_estimate,candidate_index,strategy");
        assert_eq!(
            read_trajectory_csv(buf.as_slice()).unwrap(),
            state.trajectory
        );
    }
}
