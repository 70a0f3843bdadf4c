//! Default-versus-incremental experiments over a corpus.
//!
//! Every (network, value function, policy) trial reformulates, runs
//! inference under the network's evidence and scores the total time with
//! the value function. Both policies on a network see the same evidence and,
//! on a simulated clock, the same per-unit execution cost.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::ClockConfig;
use crate::error::{Error, Result};
use crate::metareason::{
    default_policy, incremental_control, ControlOptions, ControlTrace, ExecPerUnitModel,
    IncrementalModels, JsonFile, TransitionModel, ValueFunction,
};
use crate::net::Evidence;
use crate::profiler::{map_indexed, Corpus};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Halt after the first K-search tree.
    Default,
    /// Myopic halt/continue control.
    Incremental,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Default => "default",
            Policy::Incremental => "incremental",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Policy::Default),
            "incremental" => Ok(Policy::Incremental),
            _ => Err(Error::Parse(format!("unknown policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedValueFunction {
    pub id: String,
    pub vf: ValueFunction,
}

fn default_observe_prob() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: Corpus,
    pub value_functions: Vec<NamedValueFunction>,
    pub policies: Vec<Policy>,
    pub delta: f64,
    #[serde(default)]
    pub clock: ClockConfig,
    pub seed: u64,
    /// Required when the incremental policy is compared.
    #[serde(default)]
    pub transition_model: Option<PathBuf>,
    #[serde(default)]
    pub per_unit_model: Option<PathBuf>,
    #[serde(default)]
    pub max_increments: Option<usize>,
    /// Probability that each variable is observed in a trial's evidence.
    #[serde(default = "default_observe_prob")]
    pub observe_prob: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.corpus.check()?;
        if self.value_functions.is_empty() || self.policies.is_empty() {
            return bad("need at least one value function and one policy".into());
        }
        for (i, named) in self.value_functions.iter().enumerate() {
            named.vf.validate()?;
            if self.value_functions[..i].iter().any(|o| o.id == named.id) {
                return bad(format!("duplicate value function id `{}`", named.id));
            }
        }
        if !(self.delta > 0.0) {
            return bad(format!("increment must be positive, got {}", self.delta));
        }
        if !(0.0..=1.0).contains(&self.observe_prob) {
            return bad(format!("observe_prob {} outside [0, 1]", self.observe_prob));
        }
        self.clock.start(0)?;
        Ok(())
    }

    /// Reads a config, resolving relative model paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(
            &std::fs::read(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        )?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.transition_model, &mut cfg.per_unit_model]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Loads the model files the incremental policy needs.
    pub fn load_models(&self) -> Result<Option<IncrementalModels>> {
        if !self.policies.contains(&Policy::Incremental) {
            return Ok(None);
        }
        let need = |p: &Option<PathBuf>, what: &str| -> Result<PathBuf> {
            let p = p.clone().ok_or_else(|| {
                Error::Config(format!("incremental policy needs a {what} model file"))
            })?;
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "{what} model file {} not found",
                    p.display()
                )));
            }
            Ok(p)
        };
        let tm = need(&self.transition_model, "transition")?;
        let pu = need(&self.per_unit_model, "per-unit")?;
        Ok(Some(IncrementalModels {
            transition: TransitionModel::load(&tm)?,
            per_unit: ExecPerUnitModel::load(&pu)?,
        }))
    }
}

impl JsonFile for ExperimentConfig {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

/// One scored trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub network_id: usize,
    pub vf_id: String,
    pub policy: Policy,
    pub t_r: f64,
    pub t_e: f64,
    pub t_total: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub vf_id: String,
    pub policy: Policy,
    pub mean_value: f64,
    pub n_trials: usize,
}

/// Score rows plus the control trace behind each row.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ScoreRow>,
    pub traces: Vec<ControlTrace>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn rows_for<'a>(
        &'a self,
        vf_id: &'a str,
        policy: Policy,
    ) -> impl Iterator<Item = (&'a ScoreRow, &'a ControlTrace)> + 'a {
        self.rows
            .iter()
            .zip(&self.traces)
            .filter(move |(r, _)| r.vf_id == vf_id && r.policy == policy)
    }

    pub fn mean(&self, vf_id: &str, policy: Policy) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.vf_id == vf_id && s.policy == policy)
            .map(|s| s.mean_value)
    }
}

/// Per-trial seed for reformulation search.
pub fn trial_seed(master: u64, network_id: usize, policy: Policy, vf_id: &str) -> u64 {
    seed::derive(
        master,
        &[
            network_id as u64,
            seed::label(policy.as_str()),
            seed::label(vf_id),
        ],
    )
}

/// Runs the experiment, loading model files named by the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let models = cfg.load_models()?;
    run_experiment_with(cfg, models.as_ref())
}

/// Runs the experiment with in-memory models.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    models: Option<&IncrementalModels>,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.policies.contains(&Policy::Incremental) && models.is_none() {
        return Err(Error::Config(
            "incremental policy needs performance models".into(),
        ));
    }
    let options = ControlOptions {
        delta: cfg.delta,
        max_increments: cfg
            .max_increments
            .unwrap_or(ControlOptions::new(cfg.delta).max_increments),
    };

    let per_network = map_indexed(cfg.corpus.count, cfg.clock.is_simulated(), |i| {
        let net = cfg.corpus.network(i)?;
        let ev_seed = seed::derive(cfg.seed, &[i as u64, seed::label("evidence")]);
        let clock_seed = seed::derive(cfg.seed, &[i as u64, seed::label("clock")]);
        let ev = Evidence::sample(&net, cfg.observe_prob, ev_seed);
        let mut out = Vec::new();
        for named in &cfg.value_functions {
            for &policy in &cfg.policies {
                let s = trial_seed(cfg.seed, i, policy, &named.id);
                let mut clock = cfg.clock.start(clock_seed)?;
                let trace = match policy {
                    Policy::Default => default_policy(&net, &named.vf, &ev, s, &mut clock)?,
                    Policy::Incremental => incremental_control(
                        &net,
                        &named.vf,
                        models.expect("checked above"),
                        options,
                        &ev,
                        s,
                        &mut clock,
                    )?,
                };
                let o = trace
                    .outcome
                    .clone()
                    .map_err(|message| Error::TrialFailed {
                        network: i,
                        message,
                    })?;
                let row = ScoreRow {
                    network_id: i,
                    vf_id: named.id.clone(),
                    policy,
                    t_r: o.t_r_total,
                    t_e: o.t_e,
                    t_total: o.t_r_total + o.t_e,
                    value: o.value,
                };
                out.push((row, trace));
            }
        }
        Ok(out)
    })?;

    let (rows, traces): (Vec<_>, Vec<_>) = per_network.into_iter().flatten().unzip();
    let summary = summarize(&rows, cfg);
    Ok(ExperimentResult {
        rows,
        traces,
        summary,
    })
}

fn summarize(rows: &[ScoreRow], cfg: &ExperimentConfig) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for named in &cfg.value_functions {
        for &policy in &cfg.policies {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.vf_id == named.id && r.policy == policy)
                .map(|r| r.value)
                .collect();
            out.push(SummaryRow {
                vf_id: named.id.clone(),
                policy,
                mean_value: values.iter().sum::<f64>() / values.len() as f64,
                n_trials: values.len(),
            });
        }
    }
    out
}

fn write_rows<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: serde::de::DeserializeOwned>(input: impl Read) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()?)
}

/// Columns `network_id,vf_id,policy,t_r,t_e,t_total,value`.
pub fn write_score_table(rows: &[ScoreRow], out: impl Write) -> Result<()> {
    write_rows(rows, out)
}

pub fn read_score_table(input: impl Read) -> Result<Vec<ScoreRow>> {
    read_rows(input)
}

/// Columns `vf_id,policy,mean_value,n_trials`.
pub fn write_summary(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    write_rows(rows, out)
}

pub fn read_summary(input: impl Read) -> Result<Vec<SummaryRow>> {
    read_rows(input)
}
