//! Daily 1-norm losses and the one-sided Diebold–Mariano test on them.

use chrono::{Days, NaiveDate};

use super::metrics::neumaier_sum;
use super::{EvalError, ForecastRecord};
use crate::stats::normal_cdf;

/// p-values above this are reported as not significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LossSeries {
    pub model: String,
    pub zone: String,
    pub dates: Vec<NaiveDate>,
    /// Σ_h |y − ŷ| per day.
    pub daily_losses: Vec<f64>,
}

impl LossSeries {
    pub fn len(&self) -> usize {
        self.daily_losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daily_losses.is_empty()
    }
}

/// Per-day sum of absolute hourly errors for the records of one model and
/// zone, ordered by date. Dates must be distinct and consecutive.
pub fn daily_l1_losses(records: &[ForecastRecord]) -> Result<LossSeries, EvalError> {
    let first = records.first().ok_or(EvalError::EmptyInput)?;
    if let Some(r) = records
        .iter()
        .find(|r| r.model != first.model || r.zone != first.zone)
    {
        return Err(EvalError::MixedRecords(format!(
            "{}/{} and {}/{}",
            first.model, first.zone, r.model, r.zone
        )));
    }
    let mut sorted: Vec<&ForecastRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.target_date);
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0].target_date, pair[1].target_date);
        if a == b {
            return Err(EvalError::DuplicateDay {
                model: first.model.clone(),
                date: a,
            });
        }
        let next = a + Days::new(1);
        if b != next {
            return Err(EvalError::MissingDay {
                model: first.model.clone(),
                date: next,
            });
        }
    }
    Ok(LossSeries {
        model: first.model.clone(),
        zone: first.zone.clone(),
        dates: sorted.iter().map(|r| r.target_date).collect(),
        daily_losses: sorted
            .iter()
            .map(|r| {
                r.actuals
                    .iter()
                    .zip(&r.predictions)
                    .map(|(y, yhat)| (y - yhat).abs())
                    .sum()
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmResult {
    pub model_x: String,
    pub model_y: String,
    pub n_days: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Statistic and one-sided p-value for a loss differential series.
///
/// `statistic = √N · mean(Δ) / s(Δ)` with the sample standard deviation
/// (denominator N − 1) and `p = Φ(statistic)`; a small p means the first
/// model has the smaller losses.
pub fn dm_statistic(differential: &[f64]) -> Result<(f64, f64), EvalError> {
    let n = differential.len();
    if n < 2 {
        return Err(EvalError::TooFewDays(n));
    }
    let mean = neumaier_sum(differential.iter().copied()) / n as f64;
    let ss = neumaier_sum(differential.iter().map(|d| (d - mean) * (d - mean)));
    let s = (ss / (n - 1) as f64).sqrt();
    if !(s > 0.0) {
        return Err(EvalError::DegenerateLosses);
    }
    let statistic = (n as f64).sqrt() * mean / s;
    Ok((statistic, normal_cdf(statistic)))
}

pub fn dm_test(x: &LossSeries, y: &LossSeries) -> Result<DmResult, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if let Some(i) = (0..x.len()).find(|&i| x.dates[i] != y.dates[i]) {
        return Err(EvalError::DateMisaligned {
            x: x.dates[i],
            y: y.dates[i],
        });
    }
    let differential: Vec<f64> = x
        .daily_losses
        .iter()
        .zip(&y.daily_losses)
        .map(|(a, b)| a - b)
        .collect();
    let (statistic, p_value) = dm_statistic(&differential)?;
    Ok(DmResult {
        model_x: x.model.clone(),
        model_y: y.model.clone(),
        n_days: x.len(),
        statistic,
        p_value,
    })
}

/// Pairwise p-values; `p[i][j]` tests whether model i beats model j.
/// The diagonal and degenerate pairs are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmMatrix {
    pub zone: String,
    pub models: Vec<String>,
    pub p: Vec<Vec<Option<f64>>>,
}

impl DmMatrix {
    /// `Some(false)` when `p > SIGNIFICANCE_LEVEL`.
    pub fn significant(&self, i: usize, j: usize) -> Option<bool> {
        self.p[i][j].map(|p| p <= SIGNIFICANCE_LEVEL)
    }
}

pub fn dm_matrix(losses: &[LossSeries]) -> Result<DmMatrix, EvalError> {
    let zone = losses.first().map(|l| l.zone.clone()).unwrap_or_default();
    let k = losses.len();
    let mut p = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            p[i][j] = match dm_test(&losses[i], &losses[j]) {
                Ok(r) => Some(r.p_value),
                Err(EvalError::DegenerateLosses) => None,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(DmMatrix {
        zone,
        models: losses.iter().map(|l| l.model.clone()).collect(),
        p,
    })
}
