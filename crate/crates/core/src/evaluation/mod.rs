//! Backtesting, error metrics and forecast comparison tests.

mod backtest;
mod dm;
mod metrics;
mod table;

use chrono::NaiveDate;
use thiserror::Error;

use crate::data::{DataError, HOURS_PER_DAY};

pub use backtest::{
    check_coverage, rolling_backtest, BacktestConfig, BacktestOutcome, ForecastFailure,
    ModelHandle,
};
pub use dm::{
    daily_l1_losses, dm_matrix, dm_statistic, dm_test, DmMatrix, DmResult, LossSeries,
    SIGNIFICANCE_LEVEL,
};
pub use metrics::{compute_mae, compute_rmse, compute_smape};
pub use table::{metric_table, MetricRow, Rank};

/// One model's forecast for one day next to what happened.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub model: String,
    pub zone: String,
    pub target_date: NaiveDate,
    pub predictions: [f64; HOURS_PER_DAY],
    pub actuals: [f64; HOURS_PER_DAY],
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no records")]
    EmptyInput,
    #[error("records from different series: {0}")]
    MixedRecords(String),
    #[error("{model}: more than one record for {date}")]
    DuplicateDay { model: String, date: NaiveDate },
    #[error("{model}: no record for {date}")]
    MissingDay { model: String, date: NaiveDate },
    #[error("loss differential has zero variance")]
    DegenerateLosses,
    #[error("loss series lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("loss series dates differ ({x} vs {y})")]
    DateMisaligned { x: NaiveDate, y: NaiveDate },
    #[error("need at least 2 days, got {0}")]
    TooFewDays(usize),
    #[error("invalid backtest configuration: {0}")]
    InvalidConfig(String),
    #[error("zone {zone}: {detail}")]
    Coverage { zone: String, detail: String },
    #[error(transparent)]
    Data(#[from] DataError),
}
