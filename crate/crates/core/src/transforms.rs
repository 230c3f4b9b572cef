//! Quantile transformation to a standard normal output distribution.
//!
//! The map is fitted on a training sample and stores evenly spaced empirical
//! quantiles. Values are sent through the piecewise-linear empirical CDF and
//! then the normal quantile function; the inverse runs the same path
//! backwards.

use thiserror::Error;

use crate::stats::{normal_cdf, normal_quantile};

pub const DEFAULT_N_QUANTILES: usize = 1000;
pub const DEFAULT_CLIP_EPS: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("need at least 2 finite training values, got {0}")]
    TooFewSamples(usize),
    #[error("training data has zero spread (all values equal {0})")]
    DegenerateDistribution(f64),
    #[error("training data contains a non-finite value")]
    NonFinite,
    #[error("clip_eps must lie in (0, 0.5), got {0}")]
    InvalidClip(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMap {
    /// Empirical quantiles at `levels`, ascending.
    reference: Vec<f64>,
    /// Probability levels `j / (m - 1)`.
    levels: Vec<f64>,
    clip_eps: f64,
}

impl QuantileMap {
    pub fn fit(training: &[f64], n_quantiles: usize) -> Result<Self, TransformError> {
        Self::fit_with_clip(training, n_quantiles, DEFAULT_CLIP_EPS)
    }

    pub fn fit_with_clip(
        training: &[f64],
        n_quantiles: usize,
        clip_eps: f64,
    ) -> Result<Self, TransformError> {
        if !(clip_eps > 0.0 && clip_eps < 0.5) {
            return Err(TransformError::InvalidClip(clip_eps));
        }
        if training.iter().any(|v| !v.is_finite()) {
            return Err(TransformError::NonFinite);
        }
        if training.len() < 2 || n_quantiles < 2 {
            return Err(TransformError::TooFewSamples(training.len()));
        }
        let mut sorted = training.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        if lo == hi {
            return Err(TransformError::DegenerateDistribution(lo));
        }

        let m = n_quantiles.min(sorted.len());
        let levels: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
        let last = (sorted.len() - 1) as f64;
        let reference = levels
            .iter()
            .map(|&p| {
                // Linear interpolation between order statistics.
                let pos = p * last;
                let i = pos.floor() as usize;
                let frac = pos - i as f64;
                if i + 1 >= sorted.len() {
                    sorted[sorted.len() - 1]
                } else {
                    sorted[i] + frac * (sorted[i + 1] - sorted[i])
                }
            })
            .collect();
        Ok(Self {
            reference,
            levels,
            clip_eps,
        })
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn n_quantiles(&self) -> usize {
        self.reference.len()
    }

    pub fn clip_eps(&self) -> f64 {
        self.clip_eps
    }

    /// Piecewise-linear empirical CDF over the reference grid.
    ///
    /// Where the grid has repeated values the left- and right-continuous
    /// interpolations disagree; their average puts a tied value in the
    /// middle of its plateau.
    pub fn empirical_cdf(&self, x: f64) -> f64 {
        0.5 * (self.cdf_right(x) + self.cdf_left(x))
    }

    fn cdf_right(&self, x: f64) -> f64 {
        let q = &self.reference;
        let j = q.partition_point(|&v| v <= x);
        if j == 0 {
            return 0.0;
        }
        if j >= q.len() {
            return 1.0;
        }
        let j = j - 1;
        let (r0, r1) = (self.levels[j], self.levels[j + 1]);
        r0 + (x - q[j]) / (q[j + 1] - q[j]) * (r1 - r0)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let q = &self.reference;
        let k = q.partition_point(|&v| v < x);
        if k == 0 {
            return 0.0;
        }
        if k >= q.len() {
            return 1.0;
        }
        let (r0, r1) = (self.levels[k - 1], self.levels[k]);
        r1 - (q[k] - x) / (q[k] - q[k - 1]) * (r1 - r0)
    }

    pub fn transform(&self, x: f64) -> f64 {
        let p = self
            .empirical_cdf(x)
            .clamp(self.clip_eps, 1.0 - self.clip_eps);
        normal_quantile(p)
    }

    pub fn inverse(&self, z: f64) -> f64 {
        let q = &self.reference;
        let p = normal_cdf(z);
        if p <= self.clip_eps || z.is_nan() {
            return q[0];
        }
        if p >= 1.0 - self.clip_eps {
            return q[q.len() - 1];
        }
        let last = (self.levels.len() - 1) as f64;
        let pos = p * last;
        let j = (pos.floor() as usize).min(q.len() - 2);
        let frac = pos - j as f64;
        q[j] + frac * (q[j + 1] - q[j])
    }

    pub fn transform_values(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.transform(x)).collect()
    }

    pub fn inverse_transform_values(&self, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.inverse(z)).collect()
    }
}
