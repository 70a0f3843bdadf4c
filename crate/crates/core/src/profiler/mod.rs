//! Empirical performance models from corpora of random networks.
//!
//! Trajectories record the best runtime estimate at fixed sampling times;
//! pooled over a corpus they give the transition model `p(ρ | t_r)`. Timing
//! inference on default trees gives the per-unit model `p(τ)`, and the two
//! compose into an execution-time family `p(t_e | t_r)`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::ClockConfig;
use crate::error::{Error, Result};
use crate::inference::infer;
use crate::metareason::{
    Bin, ExecPerUnitModel, ExecTimeDistribution, ExecTimeFamily, Histogram, JsonFile,
    TransitionModel, DEFAULT_BINS,
};
use crate::net::{generate_random, BeliefNetwork, Evidence, GeneratorParams};
use crate::reformulation::{default_tree, AnytimeSearch};
use crate::seed;

pub const DEFAULT_CORPUS_SIZE: usize = 200;

/// A reproducible set of random networks: network `i` is generated from
/// `derive(seed, [i])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub params: GeneratorParams,
    pub seed: u64,
    pub count: usize,
}

impl Corpus {
    pub fn new(params: GeneratorParams, seed: u64, count: usize) -> Self {
        Corpus {
            params,
            seed,
            count,
        }
    }

    pub fn network_seed(&self, i: usize) -> u64 {
        seed::derive(self.seed, &[i as u64])
    }

    /// Seed for a named per-network task such as `"search"` or `"clock"`.
    pub fn task_seed(&self, i: usize, task: &str) -> u64 {
        seed::derive(self.seed, &[i as u64, seed::label(task)])
    }

    pub fn network(&self, i: usize) -> Result<BeliefNetwork> {
        generate_random(&self.params, self.network_seed(i))
    }

    pub fn networks(&self) -> Result<Vec<BeliefNetwork>> {
        map_indexed(self.count, true, |i| self.network(i))
    }
}

impl JsonFile for Corpus {
    fn check(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("corpus count must be at least 1".into()));
        }
        // Parameter checks live in the generator.
        self.network(0).map(|_| ())
    }
}

/// Runs `f` over `0..n`, in parallel when allowed, returning results in
/// index order.
pub(crate) fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t_r: f64,
    pub best_estimate: u64,
}

/// Best estimate at `k·sample_step` for `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub network_id: usize,
    pub sample_step: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Estimates divided by the first one.
    pub fn normalized(&self) -> Vec<f64> {
        let first = self.samples[0].best_estimate as f64;
        self.samples
            .iter()
            .map(|s| s.best_estimate as f64 / first)
            .collect()
    }

    pub fn estimate_at(&self, t_r: f64) -> Option<u64> {
        self.samples
            .iter()
            .find(|s| same_time(s.t_r, t_r))
            .map(|s| s.best_estimate)
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Runs anytime search on every corpus network up to `horizon`, sampling the
/// best estimate every `sample_step`. Simulated runs go in parallel; wall
/// runs go one at a time so they do not contend for the CPU.
pub fn collect_trajectories(
    corpus: &Corpus,
    horizon: f64,
    sample_step: f64,
    clock: &ClockConfig,
) -> Result<Vec<Trajectory>> {
    if !(sample_step > 0.0 && horizon > sample_step) {
        return Err(Error::InvalidArgument(format!(
            "need horizon > sample step > 0, got {horizon} and {sample_step}"
        )));
    }
    let n_samples = (horizon / sample_step + 1e-9).floor() as usize;
    map_indexed(corpus.count, clock.is_simulated(), |i| {
        let net = corpus.network(i)?;
        let mut clk = clock.start(corpus.task_seed(i, "clock"))?;
        let mut search = AnytimeSearch::new(&net, corpus.task_seed(i, "search"), &mut clk)?;
        let mut samples = Vec::with_capacity(n_samples);
        for k in 1..=n_samples {
            let t_r = k as f64 * sample_step;
            search.run_until(&mut clk, t_r)?;
            samples.push(TrajectorySample {
                t_r,
                best_estimate: search.state().best_estimate.cells(),
            });
        }
        Ok(Trajectory {
            network_id: i,
            sample_step,
            samples,
        })
    })
}

/// `p(ρ)` from observed ratios: an atom at `ρ = 1` for "no improvement",
/// the rest histogrammed into `n_bins`.
pub fn rho_histogram(ratios: &[f64], n_bins: usize) -> Result<Histogram> {
    if ratios.is_empty() {
        return Err(Error::InvalidDistribution("no ratios to histogram".into()));
    }
    if let Some(&rho) = ratios.iter().find(|&&r| r > 1.0) {
        return Err(Error::RatioAboveOne { rho });
    }
    let n = ratios.len() as f64;
    let improved: Vec<(f64, f64)> = ratios
        .iter()
        .filter(|&&r| r < 1.0)
        .map(|&r| (r, 1.0))
        .collect();
    let unchanged = ratios.len() - improved.len();
    if improved.is_empty() {
        return Ok(Histogram::point_mass(1.0));
    }
    let mut h = Histogram::from_samples(&improved, n_bins)?;
    let share = improved.len() as f64 / n;
    for b in &mut h.bins {
        b.mass *= share;
    }
    if unchanged > 0 {
        h.bins.push(Bin {
            lo: 1.0,
            hi: 1.0,
            point: 1.0,
            mass: unchanged as f64 / n,
        });
    }
    h.validate()?;
    Ok(h)
}

/// Pools `ρ = E(t_r + Δ) / E(t_r)` over every trajectory and sampled `t_r`,
/// binned by `t_r`. Empty bins copy the nearest nonempty bin (the lower one
/// on equal distance) and are flagged as inherited.
pub fn fit_transition_model(
    trajs: &[Trajectory],
    delta: f64,
    t_r_bin_edges: &[f64],
) -> Result<TransitionModel> {
    let shell = TransitionModel {
        delta_seconds: delta,
        t_r_bin_edges: t_r_bin_edges.to_vec(),
        rho: vec![Histogram::point_mass(1.0); t_r_bin_edges.len()],
        inherited: vec![false; t_r_bin_edges.len()],
    };
    shell.validate()?;

    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); t_r_bin_edges.len()];
    for tr in trajs {
        let lag = (delta / tr.sample_step).round() as usize;
        if lag == 0 || !same_time(lag as f64 * tr.sample_step, delta) {
            return Err(Error::InvalidArgument(format!(
                "increment {delta} is not a multiple of sample step {}",
                tr.sample_step
            )));
        }
        for w in tr.samples.windows(lag + 1) {
            let rho = w[lag].best_estimate as f64 / w[0].best_estimate as f64;
            if rho > 1.0 {
                return Err(Error::RatioAboveOne { rho });
            }
            pooled[shell.bin_for(w[0].t_r)].push(rho);
        }
    }

    let filled: Vec<usize> = (0..pooled.len())
        .filter(|&i| !pooled[i].is_empty())
        .collect();
    if filled.is_empty() {
        return Err(Error::InvalidArgument(
            "trajectories too short for the increment".into(),
        ));
    }
    let mut model = shell;
    for i in 0..pooled.len() {
        let source = *filled
            .iter()
            .min_by_key(|&&j| (j.abs_diff(i), j))
            .expect("nonempty");
        model.rho[i] = rho_histogram(&pooled[source], DEFAULT_BINS)?;
        model.inherited[i] = source != i;
    }
    Ok(model)
}

/// Per-unit samples `τ = t_e / E` from inference on each network's default
/// tree under forward-sampled evidence, plus the fitted model.
pub fn collect_exec_per_unit(
    corpus: &Corpus,
    clock: &ClockConfig,
    observe_prob: f64,
) -> Result<(ExecPerUnitModel, Vec<f64>)> {
    let taus = map_indexed(corpus.count, clock.is_simulated(), |i| {
        let net = corpus.network(i)?;
        let tree = default_tree(&net)?;
        let ev = Evidence::sample(&net, observe_prob, corpus.task_seed(i, "evidence"));
        let mut clk = clock.start(corpus.task_seed(i, "exec"))?;
        let (_, t_e) = infer(&net, &tree, &ev, &mut clk)?;
        Ok(t_e / tree.estimate.as_f64())
    })?;
    let taus: Vec<f64> = taus.into_iter().filter(|&t| t > 0.0).collect();
    let samples: Vec<(f64, f64)> = taus.iter().map(|&t| (t, 1.0)).collect();
    let model = ExecPerUnitModel::new(Histogram::from_samples(&samples, DEFAULT_BINS)?)?;
    Ok((model, taus))
}

/// `p(t_e | t_r)` at each grid point: the per-unit model scaled by each
/// trajectory's best estimate at `t_r`, trajectories weighted equally.
pub fn derive_exec_family(
    trajs: &[Trajectory],
    pu: &ExecPerUnitModel,
    grid: &[f64],
    context: &str,
) -> Result<ExecTimeFamily> {
    if trajs.is_empty() {
        return Err(Error::InvalidArgument("no trajectories".into()));
    }
    let w = 1.0 / trajs.len() as f64;
    let mut members = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut mixture = Vec::new();
        for tr in trajs {
            let e = tr
                .estimate_at(t)
                .ok_or_else(|| Error::InvalidArgument(format!("t_r = {t} is not a sampled time")))?
                as f64;
            mixture.extend(
                pu.tau
                    .bins
                    .iter()
                    .filter(|b| b.mass > 0.0)
                    .map(|b| (b.point * e, b.mass * w)),
            );
        }
        let h = Histogram::from_samples(&mixture, DEFAULT_BINS)?;
        members.push(ExecTimeDistribution::new(h, context)?);
    }
    ExecTimeFamily::new(grid.to_vec(), members)
}

/// Settings for a full profiling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub horizon: f64,
    pub sample_step: f64,
    pub delta: f64,
    pub t_r_bin_edges: Vec<f64>,
    /// Family grid; `None` uses every sampled time.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    pub observe_prob: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            horizon: 5.0,
            sample_step: 0.25,
            delta: 0.5,
            t_r_bin_edges: (0..10).map(|i| i as f64 * 0.5).collect(),
            grid: None,
            observe_prob: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Profile {
    pub trajectories: Vec<Trajectory>,
    pub transition: TransitionModel,
    pub per_unit: ExecPerUnitModel,
    pub per_unit_samples: Vec<f64>,
    pub family: ExecTimeFamily,
}

pub fn profile(corpus: &Corpus, cfg: &ProfileConfig, clock: &ClockConfig) -> Result<Profile> {
    let trajectories = collect_trajectories(corpus, cfg.horizon, cfg.sample_step, clock)?;
    let transition = fit_transition_model(&trajectories, cfg.delta, &cfg.t_r_bin_edges)?;
    let (per_unit, per_unit_samples) = collect_exec_per_unit(corpus, clock, cfg.observe_prob)?;
    let grid = match &cfg.grid {
        Some(g) => g.clone(),
        None => trajectories[0].samples.iter().map(|s| s.t_r).collect(),
    };
    let context = format!(
        "corpus seed {} count {} params {:?}; {} clock",
        corpus.seed,
        corpus.count,
        corpus.params,
        if clock.is_simulated() {
            "simulated"
        } else {
            "wall"
        }
    );
    let family = derive_exec_family(&trajectories, &per_unit, &grid, &context)?;
    Ok(Profile {
        trajectories,
        transition,
        per_unit,
        per_unit_samples,
        family,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexRow {
    network_id: usize,
    sample_step: f64,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    t_r: f64,
    best_estimate: u64,
    normalized: f64,
}

/// Writes `index.csv` plus one `network_<id>.csv` per trajectory into `dir`.
pub fn write_trajectory_archive(dir: &Path, trajs: &[Trajectory]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut index = csv::Writer::from_path(dir.join("index.csv"))?;
    for tr in trajs {
        let file = format!("network_{}.csv", tr.network_id);
        index.serialize(IndexRow {
            network_id: tr.network_id,
            sample_step: tr.sample_step,
            file: file.clone(),
        })?;
        let mut w = csv::Writer::from_path(dir.join(&file))?;
        for (s, normalized) in tr.samples.iter().zip(tr.normalized()) {
            w.serialize(SampleRow {
                t_r: s.t_r,
                best_estimate: s.best_estimate,
                normalized,
            })?;
        }
        w.flush()?;
    }
    index.flush()?;
    Ok(())
}

pub fn read_trajectory_archive(dir: &Path) -> Result<Vec<Trajectory>> {
    let mut index = csv::Reader::from_path(dir.join("index.csv"))?;
    let mut out = Vec::new();
    for row in index.deserialize::<IndexRow>() {
        let row = row?;
        let mut r = csv::Reader::from_path(dir.join(&row.file))?;
        let samples = r
            .deserialize::<SampleRow>()
            .map(|s| {
                s.map(|s| TrajectorySample {
                    t_r: s.t_r,
                    best_estimate: s.best_estimate,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if samples.is_empty() {
            return Err(Error::Parse(format!("{} has no samples", row.file)));
        }
        out.push(Trajectory {
            network_id: row.network_id,
            sample_step: row.sample_step,
            samples,
        });
    }
    Ok(out)
}
