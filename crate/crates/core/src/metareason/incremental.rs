//! Myopic halt/continue control of reformulation.
//!
//! After each increment of search the controller compares the expected value
//! of solving the current best tree now against the expected value of
//! searching one more increment first, using two empirical models: how much
//! the best estimate tends to shrink over an increment at a given `t_r`, and
//! how much execution time one state-space cell costs.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::value::ValueFunction;
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::inference::infer;
use crate::net::{BeliefNetwork, Evidence};
use crate::reformulation::{AnytimeSearch, JoinTree, RuntimeEstimate};

/// Distribution of `τ = t_e / E`, seconds per state-space cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecPerUnitModel {
    pub tau: Histogram,
}

impl ExecPerUnitModel {
    pub fn new(tau: Histogram) -> Result<Self> {
        let m = ExecPerUnitModel { tau };
        m.validate()?;
        Ok(m)
    }

    pub fn point(tau: f64) -> Self {
        ExecPerUnitModel {
            tau: Histogram::point_mass(tau),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tau.validate()?;
        if self
            .tau
            .bins
            .iter()
            .any(|b| b.mass > 0.0 && !(b.point > 0.0))
        {
            return Err(Error::InvalidModel("per-unit time must be positive".into()));
        }
        Ok(())
    }
}

/// Distribution of the ratio `ρ = E(t_r + Δ) / E(t_r)` by `t_r` bin.
///
/// `t_r_bin_edges[i]` is the lower edge of bin `i`; the last bin is
/// open-ended and times before the first edge use bin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    pub delta_seconds: f64,
    pub t_r_bin_edges: Vec<f64>,
    pub rho: Vec<Histogram>,
    /// Bins with no observations that copied a neighbor's histogram.
    #[serde(default)]
    pub inherited: Vec<bool>,
}

impl TransitionModel {
    /// One histogram for every `t_r`.
    pub fn stationary(delta_seconds: f64, rho: Histogram) -> Result<Self> {
        let m = TransitionModel {
            delta_seconds,
            t_r_bin_edges: vec![0.0],
            rho: vec![rho],
            inherited: vec![false],
        };
        m.validate()?;
        Ok(m)
    }

    /// Every increment leaves the estimate unchanged.
    pub fn no_improvement(delta_seconds: f64) -> Self {
        Self::stationary(delta_seconds, Histogram::point_mass(1.0)).expect("valid model")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_seconds > 0.0) {
            return Err(Error::InvalidModel("increment must be positive".into()));
        }
        if self.t_r_bin_edges.is_empty() || self.t_r_bin_edges.len() != self.rho.len() {
            return Err(Error::InvalidModel(
                "need one ρ histogram per t_r bin".into(),
            ));
        }
        if self.t_r_bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidModel(
                "t_r bin edges must strictly increase".into(),
            ));
        }
        for h in &self.rho {
            h.validate()?;
            if h.bins
                .iter()
                .any(|b| b.hi > 1.0 || (b.mass > 0.0 && !(b.point > 0.0)))
            {
                return Err(Error::InvalidModel("ρ support must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn bin_for(&self, t_r: f64) -> usize {
        self.t_r_bin_edges
            .iter()
            .rposition(|&e| e <= t_r)
            .unwrap_or(0)
    }

    pub fn rho_at(&self, t_r: f64) -> &Histogram {
        &self.rho[self.bin_for(t_r)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalModels {
    pub transition: TransitionModel,
    pub per_unit: ExecPerUnitModel,
}

/// `EV_halt` for a (possibly fractional) estimate of `e` cells.
pub fn ev_halt_at(vf: &ValueFunction, t_r: f64, e: f64, pu: &ExecPerUnitModel) -> f64 {
    pu.tau.expect(|tau| vf.eval(t_r + tau * e))
}

/// Expected value of solving the current best tree now:
/// `Σ_τ V(t_r + τ·E)·p(τ)`.
pub fn ev_halt(vf: &ValueFunction, t_r: f64, e: RuntimeEstimate, pu: &ExecPerUnitModel) -> f64 {
    ev_halt_at(vf, t_r, e.as_f64(), pu)
}

/// Expected value of searching one more increment, then solving:
/// `Σ_ρ p(ρ | t_r) Σ_τ V(t_r + Δ + τ·ρ·E)·p(τ)`.
pub fn ev_continue(
    vf: &ValueFunction,
    t_r: f64,
    e: RuntimeEstimate,
    tm: &TransitionModel,
    pu: &ExecPerUnitModel,
) -> f64 {
    let later = t_r + tm.delta_seconds;
    let e = e.as_f64();
    tm.rho_at(t_r)
        .expect(|rho| ev_halt_at(vf, later, rho * e, pu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Continue,
    Halt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlStep {
    pub step: usize,
    pub t_r: f64,
    pub estimate: u64,
    pub ev_halt: f64,
    pub ev_continue: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOutcome {
    pub t_r_total: f64,
    pub t_e: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ControlTrace {
    pub steps: Vec<ControlStep>,
    pub tree: JoinTree,
    /// `Err` carries a propagation failure message.
    pub outcome: std::result::Result<ControlOutcome, String>,
}

impl ControlTrace {
    pub fn halted_at_first_comparison(&self) -> bool {
        self.steps.len() == 1 && self.steps[0].decision == Decision::Halt
    }

    pub fn continues(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.decision == Decision::Continue)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOptions {
    pub delta: f64,
    /// Comparisons after which the controller halts regardless.
    pub max_increments: usize,
}

impl ControlOptions {
    pub fn new(delta: f64) -> Self {
        ControlOptions {
            delta,
            max_increments: 1000,
        }
    }
}

fn finish(
    net: &BeliefNetwork,
    vf: &ValueFunction,
    tree: &JoinTree,
    ev: &Evidence,
    t_r: f64,
    clock: &mut Clock,
) -> std::result::Result<ControlOutcome, String> {
    match infer(net, tree, ev, clock) {
        Ok((_, t_e)) => Ok(ControlOutcome {
            t_r_total: t_r,
            t_e,
            value: vf.eval(t_r + t_e),
        }),
        Err(e) => Err(e.to_string()),
    }
}

/// Incremental policy: search in increments of `Δ`, halting as soon as
/// `EV_halt ≥ EV_continue`, then run inference on the best tree.
pub fn incremental_control(
    net: &BeliefNetwork,
    vf: &ValueFunction,
    models: &IncrementalModels,
    options: ControlOptions,
    ev: &Evidence,
    seed: u64,
    clock: &mut Clock,
) -> Result<ControlTrace> {
    if !(options.delta > 0.0) {
        return Err(Error::InvalidArgument(
            "increment Δ must be positive".into(),
        ));
    }
    models.transition.validate()?;
    models.per_unit.validate()?;

    let mut search = AnytimeSearch::new(net, seed, clock)?;
    let mut steps = Vec::new();
    let mut target = options.delta;
    loop {
        search.run_until(clock, target)?;
        let t_r = clock.elapsed();
        let e = search.state().best_estimate;
        let h = ev_halt(vf, t_r, e, &models.per_unit);
        let c = ev_continue(vf, t_r, e, &models.transition, &models.per_unit);
        let decision = if h >= c || steps.len() + 1 >= options.max_increments {
            Decision::Halt
        } else {
            Decision::Continue
        };
        steps.push(ControlStep {
            step: steps.len(),
            t_r,
            estimate: e.cells(),
            ev_halt: h,
            ev_continue: c,
            decision,
        });
        if decision == Decision::Halt {
            break;
        }
        target = t_r + options.delta;
    }

    let t_r = clock.elapsed();
    let tree = search.into_state().best_tree;
    let outcome = finish(net, vf, &tree, ev, t_r, clock);
    Ok(ControlTrace {
        steps,
        tree,
        outcome,
    })
}

/// Default policy: solve the first tree lowest-id K-search produces.
pub fn default_policy(
    net: &BeliefNetwork,
    vf: &ValueFunction,
    ev: &Evidence,
    seed: u64,
    clock: &mut Clock,
) -> Result<ControlTrace> {
    let search = AnytimeSearch::new(net, seed, clock)?;
    let t_r = clock.elapsed();
    let state = search.into_state();
    let steps = vec![ControlStep {
        step: 0,
        t_r,
        estimate: state.best_estimate.cells(),
        ev_halt: f64::NAN,
        ev_continue: f64::NAN,
        decision: Decision::Halt,
    }];
    let outcome = finish(net, vf, &state.best_tree, ev, t_r, clock);
    Ok(ControlTrace {
        steps,
        tree: state.best_tree,
        outcome,
    })
}

/// Writes the per-step table, then a `t_r_total,t_e,value` header and line.
pub fn write_trace_csv(trace: &ControlTrace, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([
        "step",
        "t_r",
        "estimate",
        "ev_halt",
        "ev_continue",
        "decision",
    ])?;
    for s in &trace.steps {
        w.write_record([
            s.step.to_string(),
            s.t_r.to_string(),
            s.estimate.to_string(),
            s.ev_halt.to_string(),
            s.ev_continue.to_string(),
            match s.decision {
                Decision::Continue => "continue".to_string(),
                Decision::Halt => "halt".to_string(),
            },
        ])?;
    }
    w.write_record(["t_r_total", "t_e", "value"])?;
    match &trace.outcome {
        Ok(o) => w.write_record([
            o.t_r_total.to_string(),
            o.t_e.to_string(),
            o.value.to_string(),
        ])?,
        Err(msg) => w.write_record(["NaN", "NaN", "NaN", msg.as_str()])?,
    }
    w.flush()?;
    Ok(())
}

/// Parses the output of [`write_trace_csv`] back into steps and outcome.
pub fn read_trace_csv(input: impl Read) -> Result<(Vec<ControlStep>, ControlOutcome)> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_reader(input);
    let records: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    let bad = |m: &str| Error::Parse(format!("control trace: {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
    if records.first().and_then(|h| h.get(0)) != Some("step") {
        return Err(bad("missing header"));
    }
    let split = records
        .iter()
        .position(|rec| rec.get(0) == Some("t_r_total"))
        .ok_or_else(|| bad("missing final record"))?;
    let mut steps = Vec::new();
    for rec in &records[1..split] {
        if rec.len() != 6 {
            return Err(bad("step row must have 6 fields"));
        }
        steps.push(ControlStep {
            step: rec[0].parse().map_err(|_| bad("bad step"))?,
            t_r: num(&rec[1])?,
            estimate: rec[2].parse().map_err(|_| bad("bad estimate"))?,
            ev_halt: num(&rec[3])?,
            ev_continue: num(&rec[4])?,
            decision: match &rec[5] {
                "continue" => Decision::Continue,
                "halt" => Decision::Halt,
                _ => return Err(bad("bad decision")),
            },
        });
    }
    let fin = records
        .get(split + 1)
        .ok_or_else(|| bad("missing final values"))?;
    if fin.len() < 3 {
        return Err(bad("final record must have 3 fields"));
    }
    Ok((
        steps,
        ControlOutcome {
            t_r_total: num(&fin[0])?,
            t_e: num(&fin[1])?,
            value: num(&fin[2])?,
        },
    ))
}
