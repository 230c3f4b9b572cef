//! The common interface the backtest drives, and the built-in models.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::classical::{
    mstl_forecast, naive_forecast, seasonal_naive_forecast, ClassicalError, MstlParams,
};
use crate::data::{HourlySeries, HOURS_PER_DAY};
use crate::external::AdapterError;
use crate::ml::{ml_forecast, MlError, MlKind, PipelineOptions};

/// Everything a model may look at when forecasting `target_date`.
///
/// `training` ends on the day before `target_date`; `context` is its final
/// `input_hours` values.
#[derive(Debug, Clone, Copy)]
pub struct ForecastInput<'a> {
    pub zone: &'a str,
    pub target_date: NaiveDate,
    pub training: &'a HourlySeries,
    pub context: &'a [f64],
}

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    External(#[from] AdapterError),
    #[error("invalid forecast: {0}")]
    InvalidOutput(String),
}

pub type DayForecast = [f64; HOURS_PER_DAY];

/// A model that can forecast independent days concurrently.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> &str;
    fn forecast(&self, input: &ForecastInput<'_>) -> Result<DayForecast, ForecastError>;
}

fn to_day(values: Vec<f64>) -> Result<DayForecast, ForecastError> {
    if values.len() != HOURS_PER_DAY {
        return Err(ForecastError::InvalidOutput(format!(
            "{} values instead of {HOURS_PER_DAY}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ForecastError::InvalidOutput("non-finite value".into()));
    }
    let mut out = [0.0; HOURS_PER_DAY];
    out.copy_from_slice(&values);
    Ok(out)
}

/// Built-in model families, named as in the result tables.
#[derive(Debug, Clone, PartialEq)]
pub enum NativeKind {
    Naive,
    SeasonalNaiveDay,
    SeasonalNaiveWeek,
    Mstl,
    ElasticNet,
    KnnRegressor,
    Svr,
}

impl NativeKind {
    pub const ALL: [NativeKind; 7] = [
        NativeKind::Naive,
        NativeKind::SeasonalNaiveDay,
        NativeKind::SeasonalNaiveWeek,
        NativeKind::Mstl,
        NativeKind::ElasticNet,
        NativeKind::KnnRegressor,
        NativeKind::Svr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NativeKind::Naive => "Naive",
            NativeKind::SeasonalNaiveDay => "SeasonalNaiveDay",
            NativeKind::SeasonalNaiveWeek => "SeasonalNaiveWeek",
            NativeKind::Mstl => "MSTL",
            NativeKind::ElasticNet => "ElasticNet",
            NativeKind::KnnRegressor => "KNNRegressor",
            NativeKind::Svr => "SVR",
        }
    }
}

impl fmt::Display for NativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NativeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NativeKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = NativeKind::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown model {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// A configured built-in model.
#[derive(Debug, Clone)]
pub struct NativeModel {
    pub name: String,
    pub kind: NativeKind,
    pub mstl: MstlParams,
    pub pipeline: PipelineOptions,
}

impl NativeModel {
    pub fn new(kind: NativeKind) -> Self {
        Self {
            name: kind.as_str().to_string(),
            kind,
            mstl: MstlParams::default(),
            pipeline: PipelineOptions::default(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_pipeline(mut self, pipeline: PipelineOptions) -> Self {
        self.pipeline = pipeline;
        self
    }
}

impl Forecaster for NativeModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn forecast(&self, input: &ForecastInput<'_>) -> Result<DayForecast, ForecastError> {
        let h = HOURS_PER_DAY;
        let values = match self.kind {
            NativeKind::Naive => naive_forecast(input.context, h)?,
            NativeKind::SeasonalNaiveDay => seasonal_naive_forecast(input.context, 24, h)?,
            NativeKind::SeasonalNaiveWeek => seasonal_naive_forecast(input.context, 168, h)?,
            NativeKind::Mstl => mstl_forecast(input.training.values(), h, &self.mstl)?,
            NativeKind::ElasticNet => {
                ml_forecast(MlKind::ElasticNet, input.training, input.context, &self.pipeline)?
                    .to_vec()
            }
            NativeKind::KnnRegressor => {
                ml_forecast(MlKind::KNN_DEFAULT, input.training, input.context, &self.pipeline)?
                    .to_vec()
            }
            NativeKind::Svr => {
                ml_forecast(MlKind::SVR_DEFAULT, input.training, input.context, &self.pipeline)?
                    .to_vec()
            }
        };
        to_day(values)
    }
}
