//! Time sources for reformulation and inference.
//!
//! A wall clock measures real time. A simulated clock advances by a fixed
//! charge per reformulation candidate and by `τ·E` per inference run, where
//! `τ` (seconds per state-space cell) is drawn from a [`TauSpec`]. Simulated
//! time is kept as an integer [`Duration`] so repeated charges do not drift.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reformulation::RuntimeEstimate;
use crate::seed;

/// Distribution of simulated seconds-per-cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauSpec {
    Fixed { tau: f64 },
    LogUniform { lo: f64, hi: f64 },
}

impl TauSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TauSpec::Fixed { tau } if tau > 0.0 && tau.is_finite() => Ok(()),
            TauSpec::LogUniform { lo, hi } if lo > 0.0 && hi >= lo && hi.is_finite() => Ok(()),
            _ => Err(Error::InvalidArgument(format!(
                "invalid tau specification {self:?}"
            ))),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            TauSpec::Fixed { tau } => tau,
            TauSpec::LogUniform { lo, hi } if hi > lo => {
                (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
            }
            TauSpec::LogUniform { lo, .. } => lo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Seconds charged per reformulation candidate.
    pub candidate_cost: f64,
    pub tau: TauSpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            candidate_cost: 0.05,
            tau: TauSpec::LogUniform { lo: 2e-5, hi: 1e-4 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClockConfig {
    Wall,
    Sim(SimConfig),
}

impl Default for ClockConfig {
    fn default() -> Self {
        ClockConfig::Sim(SimConfig::default())
    }
}

impl ClockConfig {
    /// A fresh clock starting at zero. `seed` drives τ draws in simulated mode.
    pub fn start(&self, seed: u64) -> Result<Clock> {
        match self {
            ClockConfig::Wall => Ok(Clock::wall()),
            ClockConfig::Sim(cfg) => Clock::simulated(*cfg, seed),
        }
    }

    pub fn is_simulated(&self) -> bool {
        matches!(self, ClockConfig::Sim(_))
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Wall {
        start: Instant,
    },
    Sim {
        elapsed: Duration,
        candidate_cost: Duration,
        tau: TauSpec,
        rng: Box<ChaCha8Rng>,
    },
}

#[derive(Debug, Clone)]
pub struct Clock {
    inner: Inner,
}

impl Clock {
    pub fn wall() -> Self {
        Clock {
            inner: Inner::Wall {
                start: Instant::now(),
            },
        }
    }

    pub fn simulated(cfg: SimConfig, seed: u64) -> Result<Self> {
        if !(cfg.candidate_cost > 0.0 && cfg.candidate_cost.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "candidate cost must be positive, got {}",
                cfg.candidate_cost
            )));
        }
        cfg.tau.validate()?;
        Ok(Clock {
            inner: Inner::Sim {
                elapsed: Duration::ZERO,
                candidate_cost: Duration::from_secs_f64(cfg.candidate_cost),
                tau: cfg.tau,
                rng: Box::new(seed::rng(seed)),
            },
        })
    }

    pub fn is_simulated(&self) -> bool {
        matches!(self.inner, Inner::Sim { .. })
    }

    /// Seconds since the clock started.
    pub fn elapsed(&self) -> f64 {
        match &self.inner {
            Inner::Wall { start } => start.elapsed().as_secs_f64(),
            Inner::Sim { elapsed, .. } => elapsed.as_secs_f64(),
        }
    }

    /// Accounts for one evaluated reformulation candidate.
    pub fn charge_candidate(&mut self) {
        if let Inner::Sim {
            elapsed,
            candidate_cost,
            ..
        } = &mut self.inner
        {
            *elapsed += *candidate_cost;
        }
    }

    /// Runs an inference job over a tree with the given estimate and reports
    /// its execution time: measured on a wall clock, `τ·E` on a simulated one.
    pub fn time_execution<R>(
        &mut self,
        estimate: RuntimeEstimate,
        job: impl FnOnce() -> R,
    ) -> (R, f64) {
        match &mut self.inner {
            Inner::Wall { .. } => {
                let t0 = Instant::now();
                let out = job();
                (out, t0.elapsed().as_secs_f64())
            }
            Inner::Sim {
                elapsed, tau, rng, ..
            } => {
                let out = job();
                let t_e = tau.sample(rng.as_mut()) * estimate.as_f64();
                *elapsed += Duration::from_secs_f64(t_e);
                (out, t_e)
            }
        }
    }
}
