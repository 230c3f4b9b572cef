//! Seeded synthetic inputs shared by the benchmarks.

use chrono::NaiveDate;
use epfbench::evaluation::ForecastRecord;
use epfbench::HourlySeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Hourly prices with daily and weekly cycles, a slow drift and noise.
pub fn synthetic_prices(days: usize, seed: u64) -> HourlySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let mut drift = 0.0;
    let values = (0..days * 24)
        .map(|t| {
            let t = t as f64;
            drift += 0.05 * rng.sample::<f64, _>(StandardNormal);
            70.0 + drift
                + 25.0 * (tau * t / 24.0).sin()
                + 10.0 * (tau * t / 168.0).cos()
                + 6.0 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    HourlySeries::new("DE", NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), values)
        .expect("whole days")
}

/// `days` records with noisy forecasts of a synthetic series.
pub fn synthetic_records(days: usize, seed: u64) -> Vec<ForecastRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = synthetic_prices(days, seed);
    (0..days)
        .map(|d| {
            let mut actuals = [0.0; 24];
            actuals.copy_from_slice(&series.values()[d * 24..(d + 1) * 24]);
            let predictions = actuals.map(|a| a + 8.0 * rng.sample::<f64, _>(StandardNormal));
            ForecastRecord {
                model: "bench".into(),
                zone: "DE".into(),
                target_date: series.start_day() + chrono::Days::new(d as u64),
                predictions,
                actuals,
            }
        })
        .collect()
}
