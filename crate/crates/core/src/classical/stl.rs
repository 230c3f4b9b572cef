use std::collections::BTreeMap;

use super::loess::{local_fit, smooth};
use super::ClassicalError;

/// Additive decomposition `series = trend + Σ seasonal + remainder`.
#[derive(Debug, Clone, PartialEq)]
pub struct StlDecomposition {
    pub trend: Vec<f64>,
    pub seasonal: BTreeMap<usize, Vec<f64>>,
    pub remainder: Vec<f64>,
    pub periods: Vec<usize>,
}

impl StlDecomposition {
    pub fn len(&self) -> usize {
        self.trend.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trend.is_empty()
    }

    /// Sum of all components at each index.
    pub fn reconstruct(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                self.trend[i]
                    + self.seasonal.values().map(|s| s[i]).sum::<f64>()
                    + self.remainder[i]
            })
            .collect()
    }

    /// The series with all seasonal components removed.
    pub fn deseasonalized(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.trend[i] + self.remainder[i])
            .collect()
    }
}

/// STL smoothing parameters. Windows are loess neighbourhood sizes in
/// observations and must be odd.
#[derive(Debug, Clone, PartialEq)]
pub struct StlParams {
    pub seasonal_window: usize,
    /// `None` uses the smallest odd integer ≥ 1.5·period / (1 − 1.5/seasonal_window).
    pub trend_window: Option<usize>,
    /// `None` uses the smallest odd integer ≥ period.
    pub low_pass_window: Option<usize>,
    pub inner_iters: usize,
    pub robust_iters: usize,
}

impl Default for StlParams {
    fn default() -> Self {
        Self {
            seasonal_window: 13,
            trend_window: None,
            low_pass_window: None,
            inner_iters: 2,
            robust_iters: 0,
        }
    }
}

pub fn default_trend_window(period: usize, seasonal_window: usize) -> usize {
    let raw = 1.5 * period as f64 / (1.0 - 1.5 / seasonal_window as f64);
    next_odd(raw.ceil() as usize)
}

fn next_odd(v: usize) -> usize {
    if v % 2 == 0 {
        v + 1
    } else {
        v
    }
}

fn check_window(name: &str, w: usize) -> Result<(), ClassicalError> {
    if w < 3 || w % 2 == 0 {
        return Err(ClassicalError::InvalidWindow(format!(
            "{name} window must be odd and at least 3, got {w}"
        )));
    }
    Ok(())
}

/// Seasonal-trend decomposition by loess for a single period.
pub fn stl_decompose(
    series: &[f64],
    period: usize,
    params: &StlParams,
) -> Result<StlDecomposition, ClassicalError> {
    if period < 2 {
        return Err(ClassicalError::InvalidWindow(format!(
            "period must be at least 2, got {period}"
        )));
    }
    let n = series.len();
    if n < 2 * period {
        return Err(ClassicalError::SeriesTooShort {
            needed: 2 * period,
            got: n,
        });
    }
    let ns = params.seasonal_window;
    let nt = params
        .trend_window
        .unwrap_or_else(|| default_trend_window(period, ns));
    let nl = params.low_pass_window.unwrap_or_else(|| next_odd(period));
    check_window("seasonal", ns)?;
    check_window("trend", nt)?;
    check_window("low-pass", nl)?;

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut robustness: Option<Vec<f64>> = None;

    for outer in 0..=params.robust_iters {
        for _ in 0..params.inner_iters.max(1) {
            inner_pass(
                series,
                period,
                ns,
                nt,
                nl,
                robustness.as_deref(),
                &mut trend,
                &mut seasonal,
            );
        }
        if outer < params.robust_iters {
            let residual: Vec<f64> = (0..n).map(|i| series[i] - trend[i] - seasonal[i]).collect();
            robustness = Some(robustness_weights(&residual));
        }
    }

    let remainder = (0..n).map(|i| series[i] - trend[i] - seasonal[i]).collect();
    Ok(StlDecomposition {
        trend,
        seasonal: BTreeMap::from([(period, seasonal)]),
        remainder,
        periods: vec![period],
    })
}

#[allow(clippy::too_many_arguments)]
fn inner_pass(
    y: &[f64],
    period: usize,
    ns: usize,
    nt: usize,
    nl: usize,
    robustness: Option<&[f64]>,
    trend: &mut [f64],
    seasonal: &mut [f64],
) {
    let n = y.len();
    let detrended: Vec<f64> = (0..n).map(|i| y[i] - trend[i]).collect();

    // Cycle-subseries smoothing, extended by one cycle at each end.
    let cycle = cycle_subseries(&detrended, period, ns, robustness);

    // Low-pass filter of the smoothed subseries.
    let ma = moving_average(&moving_average(&moving_average(&cycle, period), period), 3);
    let low = smooth(&ma, nl, None);

    for i in 0..n {
        seasonal[i] = cycle[period + i] - low[i];
    }
    let deseasonalized: Vec<f64> = (0..n).map(|i| y[i] - seasonal[i]).collect();
    let smoothed = smooth(&deseasonalized, nt, robustness);
    trend.copy_from_slice(&smoothed);
}

/// Smooths each cycle-subseries and extrapolates one step before and after,
/// returning a series of length `n + 2·period` aligned so that index
/// `period + i` corresponds to input index `i`.
fn cycle_subseries(y: &[f64], period: usize, ns: usize, robustness: Option<&[f64]>) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n + 2 * period];
    let mut sub = Vec::with_capacity(n / period + 1);
    let mut sub_rw = Vec::with_capacity(n / period + 1);
    let mut weights = vec![0.0; n / period + 1];
    for phase in 0..period {
        sub.clear();
        sub_rw.clear();
        for i in (phase..n).step_by(period) {
            sub.push(y[i]);
            if let Some(rw) = robustness {
                sub_rw.push(rw[i]);
            }
        }
        let k = sub.len();
        let rw = robustness.map(|_| sub_rw.as_slice());
        let smoothed = smooth(&sub, ns, rw);

        let right = ns.min(k) - 1;
        let before = local_fit(&sub, ns, -1.0, 0, right, rw, &mut weights).unwrap_or(smoothed[0]);
        let left = k.saturating_sub(ns);
        let after =
            local_fit(&sub, ns, k as f64, left, k - 1, rw, &mut weights).unwrap_or(smoothed[k - 1]);

        out[phase] = before;
        for (m, v) in smoothed.iter().enumerate() {
            out[phase + (m + 1) * period] = *v;
        }
        out[phase + (k + 1) * period] = after;
    }
    out
}

fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    if n < len {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n - len + 1);
    let mut sum: f64 = x[..len].iter().sum();
    out.push(sum / len as f64);
    for i in len..n {
        sum += x[i] - x[i - len];
        out.push(sum / len as f64);
    }
    out
}

fn robustness_weights(residual: &[f64]) -> Vec<f64> {
    let mut abs: Vec<f64> = residual.iter().map(|r| r.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    };
    let h = 6.0 * median;
    residual
        .iter()
        .map(|r| {
            if h == 0.0 {
                return 1.0;
            }
            let u = r.abs() / h;
            if u <= 0.001 {
                1.0
            } else if u <= 0.999 {
                (1.0 - u * u).powi(2)
            } else {
                0.0
            }
        })
        .collect()
}
