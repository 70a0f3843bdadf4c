//! A-priori partition: choose the reformulation time `t_r` on a fixed grid
//! that maximizes expected value, given one execution-time distribution per
//! grid point.

use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::value::ValueFunction;
use crate::error::{Error, Result};

/// Relative tolerance under which two objective values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `p(t_e | t_r, ξ)`; `context` describes the conditions it was measured
/// under (generator parameters, clock mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecTimeDistribution {
    pub histogram: Histogram,
    #[serde(default)]
    pub context: String,
}

impl ExecTimeDistribution {
    pub fn new(histogram: Histogram, context: impl Into<String>) -> Result<Self> {
        histogram.validate()?;
        Ok(ExecTimeDistribution {
            histogram,
            context: context.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecTimeFamily {
    pub grid: Vec<f64>,
    pub members: Vec<ExecTimeDistribution>,
}

impl ExecTimeFamily {
    pub fn new(grid: Vec<f64>, members: Vec<ExecTimeDistribution>) -> Result<Self> {
        let fam = ExecTimeFamily { grid, members };
        fam.validate()?;
        Ok(fam)
    }

    /// The same distribution at every grid point.
    pub fn constant(grid: Vec<f64>, dist: ExecTimeDistribution) -> Result<Self> {
        let members = vec![dist; grid.len()];
        Self::new(grid, members)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.len() != self.members.len() {
            return Err(Error::InvalidDistribution(
                "family grid must be non-empty with one distribution per point".into(),
            ));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) || self.grid.iter().any(|t| !t.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "family grid must strictly increase".into(),
            ));
        }
        for m in &self.members {
            m.histogram.validate()?;
        }
        Ok(())
    }

    fn index_of(&self, t_r: f64) -> Option<usize> {
        self.grid
            .iter()
            .position(|&g| (g - t_r).abs() <= 1e-12 * g.abs().max(1.0))
    }
}

/// First index of the maximum, counting values within [`TIE_TOLERANCE`]
/// (relative) of the running best as ties.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b + TIE_TOLERANCE * b.abs() => best = Some((i, v)),
            _ => {}
        }
    }
    best
}

/// `m^(i) = Σ p·t_e^i` for `i = 1..=n`.
pub fn moments(d: &ExecTimeDistribution, n: usize) -> Vec<f64> {
    d.histogram.moments(n)
}

/// `Σ_bins V(t_r + t_e)·p(t_e)`.
pub fn expected_value(vf: &ValueFunction, t_r: f64, d: &ExecTimeDistribution) -> f64 {
    d.histogram.expect(|t_e| vf.eval(t_r + t_e))
}

/// Grid point maximizing expected value, with the smallest `t_r` on ties.
pub fn optimize_apriori(vf: &ValueFunction, fam: &ExecTimeFamily) -> (f64, f64) {
    let evs = fam
        .grid
        .iter()
        .zip(&fam.members)
        .map(|(&t, d)| expected_value(vf, t, d));
    let (i, ev) = argmax_first(evs).expect("family grid is non-empty");
    (fam.grid[i], ev)
}

/// Probability of finishing by the deadline, `P(t_r + t_e ≤ a)`, at each grid
/// point.
pub fn completion_probabilities(fam: &ExecTimeFamily, a: f64) -> Vec<f64> {
    fam.grid
        .iter()
        .zip(&fam.members)
        .map(|(&t, d)| {
            d.histogram
                .expect(|t_e| if t + t_e <= a { 1.0 } else { 0.0 })
        })
        .collect()
}

/// Deadline specialization: maximize the probability of completing by `a`.
/// `k` only scales the objective and never changes the answer.
pub fn deadline_optimum(fam: &ExecTimeFamily, a: f64, _k: f64) -> f64 {
    let (i, _) = argmax_first(completion_probabilities(fam, a)).expect("family grid is non-empty");
    fam.grid[i]
}

/// Three-point derivative on a possibly uneven grid; exact for quadratics.
fn central_difference(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivative in `t_r` of the polynomial expected value
/// `Σ_i a_i Σ_j C(i,j) t_r^j m^(i−j)(t_r)`, with moment derivatives from
/// central differences on the family grid. Zero at an interior optimum.
pub fn polynomial_foc_residual(coeffs: &[f64], fam: &ExecTimeFamily, t_r: f64) -> Result<f64> {
    let k = fam
        .index_of(t_r)
        .ok_or_else(|| Error::InvalidArgument(format!("t_r = {t_r} is not a grid point")))?;
    if k == 0 || k + 1 == fam.grid.len() {
        return Err(Error::BoundaryPoint { t_r });
    }
    let degree = coeffs.len().saturating_sub(1);
    let t = [fam.grid[k - 1], fam.grid[k], fam.grid[k + 1]];
    // m[p] at the three points, with m^(0) = 1
    let raw: Vec<Vec<f64>> = (k - 1..=k + 1)
        .map(|i| {
            let mut m = vec![1.0];
            m.extend(fam.members[i].histogram.moments(degree));
            m
        })
        .collect();
    let m = |p: usize| raw[1][p];
    let dm = |p: usize| {
        if p == 0 {
            0.0
        } else {
            central_difference(t, [raw[0][p], raw[1][p], raw[2][p]])
        }
    };
    let tr = t[1];
    let mut residual = 0.0;
    for (i, &a) in coeffs.iter().enumerate().skip(1) {
        let mut inner = 0.0;
        for j in 0..=i {
            let c = binomial(i, j);
            let d_power = if j == 0 {
                0.0
            } else {
                j as f64 * tr.powi(j as i32 - 1)
            };
            inner += c * (d_power * m(i - j) + tr.powi(j as i32) * dm(i - j));
        }
        residual += a * inner;
    }
    Ok(residual)
}

/// Residual at every interior grid point.
pub fn foc_residual_curve(coeffs: &[f64], fam: &ExecTimeFamily) -> Vec<(f64, f64)> {
    fam.grid
        .iter()
        .skip(1)
        .take(fam.grid.len().saturating_sub(2))
        .map(|&t| {
            (
                t,
                polynomial_foc_residual(coeffs, fam, t).expect("interior point"),
            )
        })
        .collect()
}

/// Target model: the grid point at which the execution-time density at the
/// remaining time `a − t_r` is highest (smallest `t_r` on ties).
pub fn target_optimum(fam: &ExecTimeFamily, a: f64) -> Result<f64> {
    let densities: Vec<Option<f64>> = fam
        .grid
        .iter()
        .zip(&fam.members)
        .map(|(&t, d)| d.histogram.density_at(a - t))
        .collect();
    if densities.iter().all(Option::is_none) {
        return Err(Error::NoFeasibleTarget);
    }
    let (i, _) = argmax_first(densities.into_iter().map(|d| d.unwrap_or(-1.0)))
        .expect("family grid is non-empty");
    Ok(fam.grid[i])
}

/// One grid point of an a-priori optimization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub t_r: f64,
    pub expected_value: f64,
    /// Only for polynomial value functions at interior points.
    pub foc_residual: Option<f64>,
    pub optimal: bool,
}

/// Expected value at every grid point, the residual curve for polynomial
/// value functions, and the optimum flagged.
pub fn optimization_table(vf: &ValueFunction, fam: &ExecTimeFamily) -> Vec<GridRow> {
    let (best, _) = optimize_apriori(vf, fam);
    let residuals = match vf {
        ValueFunction::Polynomial { coeffs } => foc_residual_curve(coeffs, fam),
        _ => Vec::new(),
    };
    fam.grid
        .iter()
        .zip(&fam.members)
        .map(|(&t_r, d)| GridRow {
            t_r,
            expected_value: expected_value(vf, t_r, d),
            foc_residual: residuals.iter().find(|r| r.0 == t_r).map(|r| r.1),
            optimal: t_r == best,
        })
        .collect()
}

pub fn write_grid_csv(rows: &[GridRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid_csv(input: impl std::io::Read) -> Result<Vec<GridRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}
