//! Rolling-origin daily backtest: every test day, each model sees the
//! trailing training window ending the day before and forecasts 24 hours.

use std::sync::Arc;

use chrono::{Days, NaiveDate};
use rayon::prelude::*;

use super::{EvalError, ForecastRecord};
use crate::data::{HourlySeries, HOURS_PER_DAY};
use crate::external::ExternalSpec;
use crate::forecaster::{DayForecast, ForecastInput, Forecaster};

#[derive(Clone)]
pub enum ModelHandle {
    /// Forecasts for different days run concurrently.
    Native(Arc<dyn Forecaster>),
    /// One child process per zone run, used for one day at a time.
    External(ExternalSpec),
}

impl ModelHandle {
    pub fn name(&self) -> &str {
        match self {
            ModelHandle::Native(m) => m.name(),
            ModelHandle::External(s) => &s.name,
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, ModelHandle::External(_))
    }
}

impl std::fmt::Debug for ModelHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelHandle::Native(m) => write!(f, "Native({})", m.name()),
            ModelHandle::External(s) => write!(f, "External({s:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BacktestConfig {
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub train_days: usize,
    pub input_hours: usize,
}

impl BacktestConfig {
    pub fn new(test_start: NaiveDate, test_end: NaiveDate) -> Self {
        Self {
            test_start,
            test_end,
            train_days: 84,
            input_hours: 168,
        }
    }

    pub fn test_days(&self) -> Vec<NaiveDate> {
        self.test_start
            .iter_days()
            .take_while(|d| *d <= self.test_end)
            .collect()
    }

    /// First day of the training window for the first test day.
    pub fn data_start(&self) -> NaiveDate {
        self.test_start - Days::new(self.train_days as u64)
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.test_end < self.test_start {
            return Err(EvalError::InvalidConfig(format!(
                "test span {}..{} is empty",
                self.test_start, self.test_end
            )));
        }
        if self.train_days < 8 {
            return Err(EvalError::InvalidConfig(format!(
                "train_days must be at least 8, got {}",
                self.train_days
            )));
        }
        if self.input_hours == 0
            || self.input_hours % HOURS_PER_DAY != 0
            || self.input_hours > self.train_days * HOURS_PER_DAY
        {
            return Err(EvalError::InvalidConfig(format!(
                "input_hours must be a positive multiple of 24 within the training window, got {}",
                self.input_hours
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastFailure {
    pub model: String,
    pub zone: String,
    pub date: NaiveDate,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BacktestOutcome {
    /// Grouped by model in configured order, date-ascending within a model.
    pub records: Vec<ForecastRecord>,
    pub failures: Vec<ForecastFailure>,
}

impl BacktestOutcome {
    pub fn failed_models(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in &self.failures {
            if !out.contains(&f.model.as_str()) {
                out.push(&f.model);
            }
        }
        out
    }
}

/// Checks that `series` covers the training window of the first test day
/// through the last test day.
pub fn check_coverage(series: &HourlySeries, config: &BacktestConfig) -> Result<(), EvalError> {
    config.validate()?;
    let need_start = config.data_start();
    if series.start_day() > need_start || series.end_day() < config.test_end {
        return Err(EvalError::Coverage {
            zone: series.zone().to_string(),
            detail: format!(
                "need {need_start}..{}, data covers {}..{}",
                config.test_end,
                series.start_day(),
                series.end_day()
            ),
        });
    }
    Ok(())
}

struct DayInputs {
    date: NaiveDate,
    training: HourlySeries,
    actuals: [f64; HOURS_PER_DAY],
}

impl DayInputs {
    fn context(&self, input_hours: usize) -> &[f64] {
        let v = self.training.values();
        &v[v.len() - input_hours..]
    }

    fn input<'a>(&'a self, zone: &'a str, input_hours: usize) -> ForecastInput<'a> {
        ForecastInput {
            zone,
            target_date: self.date,
            training: &self.training,
            context: self.context(input_hours),
        }
    }
}

fn day_inputs(series: &HourlySeries, config: &BacktestConfig) -> Result<Vec<DayInputs>, EvalError> {
    config
        .test_days()
        .into_iter()
        .map(|date| {
            let training = series.slice_window(date - Days::new(1), config.train_days)?;
            debug_assert!(training.end_day() < date);
            let actuals = series
                .day(date)
                .ok_or_else(|| EvalError::Coverage {
                    zone: series.zone().to_string(),
                    detail: format!("no actuals for {date}"),
                })?
                .hours;
            Ok(DayInputs {
                date,
                training,
                actuals,
            })
        })
        .collect()
}

/// Runs every model over every test day of one zone.
///
/// Per-(model, day) failures are collected, not raised. A fatal error from
/// an external child (crash, timeout, protocol violation) stops that model
/// for the rest of the span; its remaining days are recorded as failures
/// and the records it already produced are kept.
pub fn rolling_backtest(
    series: &HourlySeries,
    models: &[ModelHandle],
    config: &BacktestConfig,
) -> Result<BacktestOutcome, EvalError> {
    check_coverage(series, config)?;
    let days = day_inputs(series, config)?;
    let zone = series.zone();
    let mut outcome = BacktestOutcome::default();

    for model in models {
        let name = model.name().to_string();
        let results: Vec<Result<DayForecast, String>> = match model {
            ModelHandle::Native(forecaster) => days
                .par_iter()
                .map(|d| {
                    forecaster
                        .forecast(&d.input(zone, config.input_hours))
                        .map_err(|e| e.to_string())
                })
                .collect(),
            ModelHandle::External(spec) => run_external(spec, zone, &days, config.input_hours),
        };
        for (d, result) in days.iter().zip(results) {
            match result {
                Ok(predictions) => outcome.records.push(ForecastRecord {
                    model: name.clone(),
                    zone: zone.to_string(),
                    target_date: d.date,
                    predictions,
                    actuals: d.actuals,
                }),
                Err(reason) => outcome.failures.push(ForecastFailure {
                    model: name.clone(),
                    zone: zone.to_string(),
                    date: d.date,
                    reason,
                }),
            }
        }
    }
    Ok(outcome)
}

fn run_external(
    spec: &ExternalSpec,
    zone: &str,
    days: &[DayInputs],
    input_hours: usize,
) -> Vec<Result<DayForecast, String>> {
    let mut child = match spec.spawn() {
        Ok(c) => c,
        Err(e) => {
            let reason = e.to_string();
            return days.iter().map(|_| Err(reason.clone())).collect();
        }
    };
    let mut results = Vec::with_capacity(days.len());
    let mut aborted: Option<String> = None;
    for d in days {
        if let Some(reason) = &aborted {
            results.push(Err(format!("not attempted: {reason}")));
            continue;
        }
        let context_end = (d.date - Days::new(1))
            .and_hms_opt(23, 0, 0)
            .expect("valid time");
        match child.forecast(zone, d.context(input_hours), context_end) {
            Ok(f) => results.push(Ok(f)),
            Err(e) => {
                if e.is_fatal() {
                    aborted = Some(e.to_string());
                }
                results.push(Err(e.to_string()));
            }
        }
    }
    if aborted.is_none() {
        child.shutdown();
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecaster::{NativeKind, NativeModel};

    fn series() -> HourlySeries {
        let start = NaiveDate::from_ymd_opt(2023, 10, 9).unwrap();
        let values: Vec<f64> = (0..100 * 24).map(|i| (i % 37) as f64).collect();
        HourlySeries::new("DE", start, values).unwrap()
    }

    #[test]
    fn counts_records() {
        let s = series();
        let cfg = BacktestConfig::new(
            NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2024, 1, 14).unwrap(),
        );
        let models = vec![
            ModelHandle::Native(Arc::new(NativeModel::new(NativeKind::Naive))),
            ModelHandle::Native(Arc::new(NativeModel::new(NativeKind::SeasonalNaiveDay))),
        ];
        let out = rolling_backtest(&s, &models, &cfg).unwrap();
        assert_eq!(out.records.len(), 28);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn first_training_window() {
        let cfg = BacktestConfig::new(
            NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
        );
        assert_eq!(cfg.data_start(), NaiveDate::from_ymd_opt(2023, 10, 9).unwrap());
        assert_eq!(cfg.test_days().len(), 366);
        let days = day_inputs(&series(), &BacktestConfig {
            test_end: NaiveDate::from_ymd_opt(2024, 1, 2).unwrap(),
            ..cfg
        })
        .unwrap();
        assert_eq!(days[0].training.start_day(), NaiveDate::from_ymd_opt(2023, 10, 9).unwrap());
        assert_eq!(days[0].training.end_day(), NaiveDate::from_ymd_opt(2023, 12, 31).unwrap());
    }

    #[test]
    fn insufficient_coverage() {
        let cfg = BacktestConfig::new(
            NaiveDate::from_ymd_opt(2023, 11, 1).unwrap(),
            NaiveDate::from_ymd_opt(2023, 11, 3).unwrap(),
        );
        assert!(matches!(
            rolling_backtest(&series(), &[], &cfg),
            Err(EvalError::Coverage { .. })
        ));
    }
}
