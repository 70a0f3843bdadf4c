use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass tolerance for every stored distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Default number of bins when samples are histogrammed.
pub const DEFAULT_BINS: usize = 64;

/// One histogram bin. Sums over the distribution treat the bin's mass as if
/// it sat at `point`; densities use the bin's extent `[lo, hi)`. A bin with
/// `lo == hi` is an atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub point: f64,
    pub mass: f64,
}

impl Bin {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn contains(&self, x: f64) -> bool {
        if self.hi > self.lo {
            self.lo <= x && x < self.hi
        } else {
            (x - self.point).abs() <= 1e-12 * x.abs().max(1.0)
        }
    }
}

/// Discrete distribution over the real line made of non-overlapping bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Histogram {
    pub bins: Vec<Bin>,
}

impl Histogram {
    pub fn point_mass(x: f64) -> Self {
        Histogram {
            bins: vec![Bin {
                lo: x,
                hi: x,
                point: x,
                mass: 1.0,
            }],
        }
    }

    /// Bins of common `width` centered on `points`.
    pub fn from_points(points: &[f64], masses: &[f64], width: f64) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::InvalidDistribution(
                "points and masses differ in length".into(),
            ));
        }
        let h = Histogram {
            bins: points
                .iter()
                .zip(masses)
                .map(|(&p, &m)| Bin {
                    lo: p - width / 2.0,
                    hi: p + width / 2.0,
                    point: p,
                    mass: m,
                })
                .collect(),
        };
        h.validate()?;
        Ok(h)
    }

    /// Equal-probability atoms at `points`.
    pub fn uniform_points(points: &[f64], width: f64) -> Result<Self> {
        let m = 1.0 / points.len() as f64;
        Self::from_points(points, &vec![m; points.len()], width)
    }

    /// Histograms weighted samples into `n_bins` equal-width bins spanning
    /// their range. Each bin's point is the weighted mean of its samples, so
    /// the first moment is preserved. Weights are normalized.
    pub fn from_samples(samples: &[(f64, f64)], n_bins: usize) -> Result<Self> {
        let total: f64 = samples.iter().map(|s| s.1).sum();
        if samples.is_empty() || !(total > 0.0) || n_bins == 0 {
            return Err(Error::InvalidDistribution("no samples to histogram".into()));
        }
        if samples.iter().any(|s| !s.0.is_finite() || !(s.1 >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "non-finite sample or negative weight".into(),
            ));
        }
        let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = samples
            .iter()
            .map(|s| s.0)
            .fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            let point = samples.iter().map(|s| s.0 * s.1).sum::<f64>() / total;
            return Ok(Histogram::point_mass(point));
        }
        let width = (hi - lo) / n_bins as f64;
        let mut mass = vec![0.0; n_bins];
        let mut moment = vec![0.0; n_bins];
        for &(x, w) in samples {
            let i = (((x - lo) / width) as usize).min(n_bins - 1);
            mass[i] += w;
            moment[i] += w * x;
        }
        let bins = (0..n_bins)
            .map(|i| {
                let b_lo = lo + width * i as f64;
                let b_hi = if i + 1 == n_bins {
                    hi
                } else {
                    lo + width * (i + 1) as f64
                };
                let point = if mass[i] > 0.0 {
                    (moment[i] / mass[i]).clamp(b_lo, b_hi)
                } else {
                    0.5 * (b_lo + b_hi)
                };
                Bin {
                    lo: b_lo,
                    hi: b_hi,
                    point,
                    mass: mass[i] / total,
                }
            })
            .collect();
        Ok(Histogram { bins })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if self.bins.is_empty() {
            return bad("histogram has no bins".into());
        }
        let mut sum = 0.0;
        for (i, b) in self.bins.iter().enumerate() {
            if ![b.lo, b.hi, b.point, b.mass].iter().all(|x| x.is_finite()) {
                return bad(format!("bin {i} has a non-finite field"));
            }
            if b.mass < 0.0 {
                return bad(format!("bin {i} has negative mass"));
            }
            if !(b.lo <= b.point && b.point <= b.hi) {
                return bad(format!(
                    "bin {i} point {} outside [{}, {}]",
                    b.point, b.lo, b.hi
                ));
            }
            if i > 0 {
                let prev = &self.bins[i - 1];
                if !(prev.point < b.point) || prev.hi > b.lo {
                    return bad(format!(
                        "bins {} and {i} overlap or are out of order",
                        i - 1
                    ));
                }
            }
            sum += b.mass;
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return bad(format!("masses sum to {sum}"));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum()
    }

    /// `E[f(X)]` with each bin's mass at its point.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.mass > 0.0)
            .map(|b| b.mass * f(b.point))
            .sum()
    }

    /// Raw moments `m^(1..=n)`.
    pub fn moments(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.expect(|x| x.powi(i as i32))).collect()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// Density at `x`: mass over width of the bin containing `x`; infinite
    /// for a loaded atom. `None` when no bin covers `x`.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.bins.iter().find(|b| b.contains(x)).map(|b| {
            if b.width() > 0.0 {
                b.mass / b.width()
            } else if b.mass > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
    }

    pub fn min_point(&self) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.mass > 0.0)
            .map(|b| b.point)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_point(&self) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.mass > 0.0)
            .map(|b| b.point)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mass at points `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.point <= x)
            .map(|b| b.mass)
            .sum()
    }
}
