// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use metapart::clock::{Clock, ClockConfig, SimConfig, TauSpec};
use metapart::harness::{run_experiment, write_score_table, write_summary, ExperimentConfig};
use metapart::inference::{infer, marginal_rows, write_marginals_csv};
use metapart::metareason::{
    default_policy, incremental_control, optimization_table, target_optimum, write_grid_csv,
    write_trace_csv, ControlOptions, ExecPerUnitModel, ExecTimeFamily, IncrementalModels, JsonFile,
    TransitionModel, ValueFunction,
};
use metapart::net::{read_network, write_network, BeliefNetwork, Evidence, GeneratorParams};
use metapart::profiler::{profile, write_trajectory_archive, Corpus, ProfileConfig};
use metapart::reformulation::{
    anytime_reformulate, default_tree, write_trajectory_csv, Budget, JoinTree,
};

/// Time-budgeted join-tree reformulation with metareasoning control.
#[derive(Parser)]
#[command(name = "metapart", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Time source.
    #[arg(long, global = true, value_enum)]
    clock: Option<ClockMode>,
    /// Output file, or directory for `gen`, `profile` and `experiment`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulated seconds charged per reformulation candidate.
    #[arg(long, global = true, default_value_t = SimConfig::default().candidate_cost)]
    candidate_cost: f64,
    /// Simulated seconds per state-space cell: `C` fixed or `LO..HI` log-uniform.
    #[arg(long, global = true)]
    tau: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClockMode {
    Wall,
    Sim,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus of random networks.
    Gen {
        /// Corpus manifest; generator flags are used when absent.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = metapart::profiler::DEFAULT_CORPUS_SIZE)]
        count: usize,
        #[arg(long, default_value_t = GeneratorParams::default().n_nodes)]
        nodes: usize,
        #[arg(long, default_value_t = GeneratorParams::default().max_parents)]
        max_parents: usize,
        #[arg(long, default_value_t = GeneratorParams::default().max_cardinality)]
        max_cardinality: usize,
        #[arg(long, default_value_t = GeneratorParams::default().edge_density)]
        edge_density: f64,
    },
    /// Anytime search on one network; emits the trajectory CSV.
    Reformulate {
        #[arg(long)]
        network: PathBuf,
        /// Reformulation budget in seconds.
        #[arg(long)]
        budget: f64,
        /// Also save the best tree as JSON.
        #[arg(long)]
        tree_out: Option<PathBuf>,
    },
    /// Junction-tree inference; emits the marginals CSV.
    Infer {
        #[arg(long)]
        network: PathBuf,
        /// Tree JSON; the default K-search tree when absent.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Observations as `NAME=STATE,...` (names or ids, state indices).
        #[arg(long)]
        evidence: Option<String>,
    },
    /// Profile a corpus into performance-model files.
    Profile {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = ProfileConfig::default().horizon)]
        horizon: f64,
        #[arg(long, default_value_t = ProfileConfig::default().sample_step)]
        step: f64,
        #[arg(long, default_value_t = ProfileConfig::default().delta)]
        delta: f64,
        #[arg(long, default_value_t = ProfileConfig::default().observe_prob)]
        observe_prob: f64,
    },
    /// A-priori optimum over an execution-time family.
    Optimize {
        #[arg(long)]
        family: PathBuf,
        /// Value function, e.g. `deadline:k=1,a=5` or `poly:0,-1`.
        #[arg(long)]
        vf: String,
    },
    /// Run a control policy on one network; emits the control trace CSV.
    Control {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        vf: String,
        #[arg(long)]
        transition: Option<PathBuf>,
        #[arg(long)]
        per_unit: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = PolicyArg::Incremental)]
        policy: PolicyArg,
        #[arg(long)]
        evidence: Option<String>,
    },
    /// Default-versus-incremental experiment from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Default,
    Incremental,
}

fn parse_tau(s: &str) -> Result<TauSpec> {
    let spec = match s.split_once("..") {
        Some((lo, hi)) => TauSpec::LogUniform {
            lo: lo.trim().parse()?,
            hi: hi.trim().parse()?,
        },
        None => TauSpec::Fixed {
            tau: s.trim().parse()?,
        },
    };
    spec.validate()?;
    Ok(spec)
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn clock_config(&self) -> Result<ClockConfig> {
        Ok(match self.clock.unwrap_or(ClockMode::Sim) {
            ClockMode::Wall => ClockConfig::Wall,
            ClockMode::Sim => {
                let tau = match &self.tau {
                    Some(s) => parse_tau(s).with_context(|| format!("bad --tau `{s}`"))?,
                    None => SimConfig::default().tau,
                };
                ClockConfig::Sim(SimConfig {
                    candidate_cost: self.candidate_cost,
                    tau,
                })
            }
        })
    }

    fn clock(&self) -> Result<Clock> {
        Ok(self.clock_config()?.start(self.seed())?)
    }

    /// Writes to `--out` when given, stdout otherwise.
    fn emit(&self, write: impl FnOnce(&mut dyn Write) -> metapart::Result<()>) -> Result<()> {
        match &self.out {
            Some(p) => {
                let mut f = io::BufWriter::new(
                    fs::File::create(p)
                        .with_context(|| format!("cannot create {}", p.display()))?,
                );
                write(&mut f)?;
                f.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
            }
        }
        Ok(())
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = self.out.as_deref().context("--out <DIR> is required")?;
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(dir)
    }
}

fn load_network(path: &Path) -> Result<BeliefNetwork> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    read_network(&bytes).with_context(|| format!("{}", path.display()))
}

fn load_json<T: JsonFile>(path: &Path) -> Result<T> {
    T::load(path).with_context(|| format!("{}", path.display()))
}

fn parse_evidence(net: &BeliefNetwork, spec: Option<&str>) -> Result<Evidence> {
    let mut pairs = Vec::new();
    for part in spec
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
    {
        let (var, state) = part
            .split_once('=')
            .with_context(|| format!("bad evidence `{part}`"))?;
        let v = match net.variable_by_name(var.trim()) {
            Some(v) => v,
            None => var
                .trim()
                .parse()
                .with_context(|| format!("unknown variable `{var}`"))?,
        };
        let s = state
            .trim()
            .parse()
            .with_context(|| format!("bad state `{state}`"))?;
        pairs.push((v, s));
    }
    let ev = Evidence::from_pairs(pairs);
    ev.check(net)?;
    Ok(ev)
}

fn load_tree(path: &Path, net: &BeliefNetwork) -> Result<JoinTree> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let tree: JoinTree = serde_json::from_slice(&bytes)
        .map_err(metapart::Error::from)
        .with_context(|| format!("{}", path.display()))?;
    if let Err(e) = tree.verify(&net.cardinalities()) {
        bail!("{}: invalid join tree: {e}", path.display());
    }
    Ok(tree)
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match &cli.command {
        Command::Gen {
            manifest,
            count,
            nodes,
            max_parents,
            max_cardinality,
            edge_density,
        } => {
            let corpus = match manifest {
                Some(p) => {
                    let mut corpus: Corpus = load_json(p)?;
                    if let Some(seed) = c.seed {
                        corpus.seed = seed;
                    }
                    corpus
                }
                None => Corpus::new(
                    GeneratorParams {
                        n_nodes: *nodes,
                        max_parents: *max_parents,
                        max_cardinality: *max_cardinality,
                        edge_density: *edge_density,
                    },
                    c.seed(),
                    *count,
                ),
            };
            corpus.check()?;
            let dir = c.out_dir()?;
            corpus.save(&dir.join("manifest.json"))?;
            for (i, net) in corpus.networks()?.iter().enumerate() {
                fs::write(dir.join(format!("network_{i}.json")), write_network(net))?;
            }
        }
        Command::Reformulate {
            network,
            budget,
            tree_out,
        } => {
            let net = load_network(network)?;
            if !(*budget >= 0.0) {
                bail!("budget must be non-negative");
            }
            let mut clock = c.clock()?;
            let state = anytime_reformulate(&net, Budget::Seconds(*budget), c.seed(), &mut clock)?;
            if let Some(p) = tree_out {
                let mut bytes = serde_json::to_vec_pretty(&state.best_tree)?;
                bytes.push(b'\n');
                fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))?;
            }
            c.emit(|w| write_trajectory_csv(&state.trajectory, w))?;
        }
        Command::Infer {
            network,
            tree,
            evidence,
        } => {
            let net = load_network(network)?;
            let tree = match tree {
                Some(p) => load_tree(p, &net)?,
                None => default_tree(&net)?,
            };
            let ev = parse_evidence(&net, evidence.as_deref())?;
            let (m, _) = infer(&net, &tree, &ev, &mut c.clock()?)?;
            c.emit(|w| write_marginals_csv(&marginal_rows(&net, &m), w))?;
        }
        Command::Profile {
            manifest,
            horizon,
            step,
            delta,
            observe_prob,
        } => {
            let corpus: Corpus = load_json(manifest)?;
            let cfg = ProfileConfig {
                horizon: *horizon,
                sample_step: *step,
                delta: *delta,
                observe_prob: *observe_prob,
                ..ProfileConfig::default()
            };
            let p = profile(&corpus, &cfg, &c.clock_config()?)?;
            let dir = c.out_dir()?;
            p.transition.save(&dir.join("transition.json"))?;
            p.per_unit.save(&dir.join("per_unit.json"))?;
            p.family.save(&dir.join("family.json"))?;
            write_trajectory_archive(&dir.join("trajectories"), &p.trajectories)?;
        }
        Command::Optimize { family, vf } => {
            let fam: ExecTimeFamily = load_json(family)?;
            let vf: ValueFunction = vf.parse()?;
            let rows = optimization_table(&vf, &fam);
            let best = rows.iter().find(|r| r.optimal).expect("one optimum");
            let mut line = format!("t_r*={} EV*={}", best.t_r, best.expected_value);
            if let ValueFunction::Target { a, .. } = vf {
                match target_optimum(&fam, a) {
                    Ok(t) => line.push_str(&format!(" mode_rule_t_r*={t}")),
                    Err(e) => line.push_str(&format!(" mode_rule: {e}")),
                }
            }
            if c.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
            c.emit(|w| write_grid_csv(&rows, w))?;
        }
        Command::Control {
            network,
            vf,
            transition,
            per_unit,
            delta,
            policy,
            evidence,
        } => {
            let net = load_network(network)?;
            let vf: ValueFunction = vf.parse()?;
            let ev = parse_evidence(&net, evidence.as_deref())?;
            let mut clock = c.clock()?;
            let trace = match policy {
                PolicyArg::Default => default_policy(&net, &vf, &ev, c.seed(), &mut clock)?,
                PolicyArg::Incremental => {
                    let (Some(tm), Some(pu)) = (transition, per_unit) else {
                        bail!("incremental policy needs --transition and --per-unit");
                    };
                    let models = IncrementalModels {
                        transition: load_json::<TransitionModel>(tm)?,
                        per_unit: load_json::<ExecPerUnitModel>(pu)?,
                    };
                    incremental_control(
                        &net,
                        &vf,
                        &models,
                        ControlOptions::new(*delta),
                        &ev,
                        c.seed(),
                        &mut clock,
                    )?
                }
            };
            c.emit(|w| write_trace_csv(&trace, w))?;
        }
        Command::Experiment { config } => {
            let mut cfg =
                ExperimentConfig::load(config).with_context(|| format!("{}", config.display()))?;
            if let Some(seed) = c.seed {
                cfg.seed = seed;
            }
            if c.clock.is_some() {
                cfg.clock = c.clock_config()?;
            }
            let res = run_experiment(&cfg)?;
            match &c.out {
                Some(_) => {
                    let dir = c.out_dir()?;
                    write_score_table(&res.rows, fs::File::create(dir.join("scores.csv"))?)?;
                    write_summary(&res.summary, fs::File::create(dir.join("summary.csv"))?)?;
                }
                None => {
                    write_score_table(&res.rows, io::stdout().lock())?;
                    write_summary(&res.summary, io::stderr().lock())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
