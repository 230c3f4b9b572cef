use std::collections::BTreeMap;

use super::ets::ets_select_fit;
use super::stl::{stl_decompose, StlDecomposition, StlParams};
use super::ClassicalError;

#[derive(Debug, Clone, PartialEq)]
pub struct MstlParams {
    pub periods: Vec<usize>,
    pub stl: StlParams,
    /// Full passes over all periods.
    pub sweeps: usize,
}

impl Default for MstlParams {
    fn default() -> Self {
        Self {
            periods: vec![24, 168],
            stl: StlParams::default(),
            sweeps: 2,
        }
    }
}

/// Multiple seasonal decomposition by iterated STL.
///
/// Each sweep visits the periods in ascending order: the current estimate of
/// that period's seasonal is added back, re-extracted with STL, and removed
/// again. Trend comes from the last STL call.
pub fn mstl_decompose(series: &[f64], params: &MstlParams) -> Result<StlDecomposition, ClassicalError> {
    let periods = &params.periods;
    if periods.is_empty() || periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClassicalError::InvalidPeriods(periods.clone()));
    }
    let longest = *periods.last().expect("non-empty");
    if series.len() < 2 * longest {
        return Err(ClassicalError::SeriesTooShort {
            needed: 2 * longest,
            got: series.len(),
        });
    }

    let n = series.len();
    let mut deseasonalized = series.to_vec();
    let mut seasonals: BTreeMap<usize, Vec<f64>> =
        periods.iter().map(|&p| (p, vec![0.0; n])).collect();
    let mut trend = vec![0.0; n];

    for _ in 0..params.sweeps.max(1) {
        for &period in periods {
            let seasonal = seasonals.get_mut(&period).expect("period registered");
            for (d, s) in deseasonalized.iter_mut().zip(seasonal.iter()) {
                *d += s;
            }
            let fit = stl_decompose(&deseasonalized, period, &params.stl)?;
            *seasonal = fit.seasonal.into_values().next().expect("one period");
            for (d, s) in deseasonalized.iter_mut().zip(seasonal.iter()) {
                *d -= s;
            }
            trend = fit.trend;
        }
    }

    let remainder = (0..n)
        .map(|i| series[i] - trend[i] - seasonals.values().map(|s| s[i]).sum::<f64>())
        .collect();
    Ok(StlDecomposition {
        trend,
        seasonal: seasonals,
        remainder,
        periods: periods.clone(),
    })
}

/// Point forecast: each seasonal repeats its final cycle, the deseasonalized
/// series is extended by the AICc-selected exponential smoothing model.
pub fn mstl_forecast(
    context: &[f64],
    horizon: usize,
    params: &MstlParams,
) -> Result<Vec<f64>, ClassicalError> {
    let decomposition = mstl_decompose(context, params)?;
    let n = context.len();
    let trend_model = ets_select_fit(&decomposition.deseasonalized())?;
    let mut out = trend_model.forecast(horizon);
    for (&period, seasonal) in &decomposition.seasonal {
        for (h, v) in out.iter_mut().enumerate() {
            *v += seasonal[n - period + h % period];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    fn wave(n: usize, period: f64, amp: f64) -> Vec<f64> {
        (0..n).map(|t| amp * (2.0 * PI * t as f64 / period).sin()).collect()
    }

    #[test]
    fn separates_daily_and_weekly_sinusoids() {
        let n = 2016;
        let daily = wave(n, 24.0, 10.0);
        let weekly = wave(n, 168.0, 6.0);
        let y: Vec<f64> = (0..n).map(|i| 50.0 + daily[i] + weekly[i]).collect();
        let d = mstl_decompose(&y, &MstlParams::default()).unwrap();
        let c24 = correlation(&d.seasonal[&24], &daily);
        let c168 = correlation(&d.seasonal[&168], &weekly);
        assert!(c24 > 0.98, "daily corr {c24}");
        assert!(c168 > 0.98, "weekly corr {c168}");
        // each seasonal averages to ~0 over its final cycle
        for (&p, s) in &d.seasonal {
            let amp = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let cycle_mean = s[n - p..].iter().sum::<f64>() / p as f64;
            assert!(cycle_mean.abs() < 0.01 * amp, "period {p}: {cycle_mean} vs {amp}");
        }
    }

    #[test]
    fn daily_only_signal_leaks_little_into_weekly() {
        let n = 2016;
        let daily = wave(n, 24.0, 10.0);
        let y: Vec<f64> = daily.iter().map(|v| 40.0 + v).collect();
        let d = mstl_decompose(&y, &MstlParams::default()).unwrap();
        let leak = d.seasonal[&168].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(leak < 1.0, "weekly leakage {leak}");
    }

    #[test]
    fn reconstruction_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..400).map(|_| rng.gen_range(-100.0..400.0)).collect();
        let d = mstl_decompose(&y, &MstlParams::default()).unwrap();
        for (a, b) in d.reconstruct().iter().zip(&y) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_periods() {
        let p = MstlParams {
            periods: vec![168, 24],
            ..Default::default()
        };
        assert!(matches!(
            mstl_decompose(&[0.0; 1000], &p),
            Err(ClassicalError::InvalidPeriods(_))
        ));
        assert!(matches!(
            mstl_decompose(&[0.0; 300], &MstlParams::default()),
            Err(ClassicalError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn constant_context_forecasts_constant() {
        let f = mstl_forecast(&[37.5; 2016], 24, &MstlParams::default()).unwrap();
        assert_eq!(f.len(), 24);
        for v in f {
            assert!((v - 37.5).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn weekly_periodic_signal_repeats_prior_week() {
        // A fixed weekly profile with distinct weekdays.
        let profile: Vec<f64> = (0..168)
            .map(|h| {
                let day = (h / 24) as f64;
                let hour = (h % 24) as f64;
                60.0 + 15.0 * (2.0 * PI * hour / 24.0).sin() + 5.0 * day - 8.0 * (day >= 5.0) as u8 as f64
            })
            .collect();
        let context: Vec<f64> = (0..2016).map(|i| profile[i % 168]).collect();
        let f = mstl_forecast(&context, 24, &MstlParams::default()).unwrap();
        for h in 0..24 {
            let want = context[2016 - 168 + h];
            assert!(((f[h] - want) / want).abs() < 0.02, "hour {h}: {} vs {want}", f[h]);
        }
    }

    #[test]
    fn level_shift_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let context: Vec<f64> = (0..1008)
            .map(|t| 50.0 + 10.0 * (2.0 * PI * t as f64 / 24.0).sin() + rng.gen_range(-5.0..5.0))
            .collect();
        let shifted: Vec<f64> = context.iter().map(|v| v + 123.0).collect();
        let a = mstl_forecast(&context, 24, &MstlParams::default()).unwrap();
        let b = mstl_forecast(&shifted, 24, &MstlParams::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 123.0).abs() < 1e-6, "{x} {y}");
        }
    }
}
