//! Hourly day-ahead price data: raw ingestion, DST normalization, canonical
//! storage and windowing.

mod canonical;
mod dst;
mod entsoe;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate};
use thiserror::Error;

pub use canonical::{read_canonical, write_canonical};
pub use dst::normalize_dst;
pub use entsoe::{parse_entsoe_csv, parse_entsoe_reader, EntsoeColumns, ParseReport, TimestampZone};

/// Number of delivery hours in a normalized market day.
pub const HOURS_PER_DAY: usize = 24;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("no valid observations in input")]
    EmptyInput,
    #[error("day {date} has {observed} hourly observations (expected 23 to 25)")]
    GapTooLarge { date: NaiveDate, observed: usize },
    #[error("day {date} has an irregular hour pattern: {detail}")]
    IrregularDay { date: NaiveDate, detail: String },
    #[error("missing day(s) between {after} and {before}")]
    NonContiguous { after: NaiveDate, before: NaiveDate },
    #[error("canonical format violation at line {line}: {reason}")]
    FormatViolation { line: usize, reason: String },
    #[error("window of {n_days} day(s) ending {end_day} is not covered by series {first}..{last}")]
    OutOfRange {
        end_day: NaiveDate,
        n_days: usize,
        first: NaiveDate,
        last: NaiveDate,
    },
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One raw hourly price as published by the transparency platform.
///
/// The timestamp keeps its UTC offset so that the local market day and hour
/// can be recovered during DST normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawObservation {
    pub timestamp: DateTime<FixedOffset>,
    pub price: f64,
    pub zone: String,
}

/// A day of exactly 24 hourly prices.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketDay {
    pub date: NaiveDate,
    pub hours: [f64; HOURS_PER_DAY],
}

impl MarketDay {
    pub fn new(date: NaiveDate, hours: [f64; HOURS_PER_DAY]) -> Result<Self, DataError> {
        if let Some(h) = hours.iter().position(|v| !v.is_finite()) {
            return Err(DataError::InvalidSeries(format!(
                "non-finite value at hour {h} of {date}"
            )));
        }
        Ok(Self { date, hours })
    }

    /// Builds a day from a slice; the slice must hold exactly 24 values.
    pub fn from_slice(date: NaiveDate, values: &[f64]) -> Result<Self, DataError> {
        let hours: [f64; HOURS_PER_DAY] = values.try_into().map_err(|_| {
            DataError::InvalidSeries(format!("expected 24 values, got {}", values.len()))
        })?;
        Self::new(date, hours)
    }
}

/// Gap-free hourly series on a 24-values-per-day grid.
///
/// Index `i` is hour `i % 24` of day `start_day + i / 24`.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    zone: String,
    start_day: NaiveDate,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(
        zone: impl Into<String>,
        start_day: NaiveDate,
        values: Vec<f64>,
    ) -> Result<Self, DataError> {
        if values.len() % HOURS_PER_DAY != 0 {
            return Err(DataError::InvalidSeries(format!(
                "length {} is not a multiple of 24",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::InvalidSeries(format!(
                "non-finite value at hour index {i}"
            )));
        }
        Ok(Self {
            zone: zone.into(),
            start_day,
            values,
        })
    }

    pub fn zone(&self) -> &str {
        &self.zone
    }

    pub fn start_day(&self) -> NaiveDate {
        self.start_day
    }

    /// Last covered day. For an empty series this is the day before `start_day`.
    pub fn end_day(&self) -> NaiveDate {
        self.start_day + Duration::days(self.n_days() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_days(&self) -> usize {
        self.values.len() / HOURS_PER_DAY
    }

    /// Index of `date` relative to `start_day`, if covered.
    pub fn day_index(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start_day).num_days();
        (offset >= 0 && (offset as usize) < self.n_days()).then_some(offset as usize)
    }

    pub fn day(&self, date: NaiveDate) -> Option<MarketDay> {
        let d = self.day_index(date)?;
        let hours: [f64; HOURS_PER_DAY] = self.values[d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY]
            .try_into()
            .ok()?;
        Some(MarketDay { date, hours })
    }

    /// The `n_days` days ending with (and including) `end_day`.
    pub fn slice_window(&self, end_day: NaiveDate, n_days: usize) -> Result<HourlySeries, DataError> {
        let out_of_range = || DataError::OutOfRange {
            end_day,
            n_days,
            first: self.start_day,
            last: self.end_day(),
        };
        if n_days == 0 {
            return Err(out_of_range());
        }
        let end = self.day_index(end_day).ok_or_else(out_of_range)?;
        if end + 1 < n_days {
            return Err(out_of_range());
        }
        let first = end + 1 - n_days;
        Ok(HourlySeries {
            zone: self.zone.clone(),
            start_day: self.start_day + Duration::days(first as i64),
            values: self.values[first * HOURS_PER_DAY..(end + 1) * HOURS_PER_DAY].to_vec(),
        })
    }

    /// Replaces every value from `from_day` onwards through `f`. Used to build
    /// perturbed copies of a series.
    pub fn map_from(&self, from_day: NaiveDate, mut f: impl FnMut(f64) -> f64) -> HourlySeries {
        let offset = (from_day - self.start_day).num_days().max(0) as usize * HOURS_PER_DAY;
        let mut values = self.values.clone();
        for v in values.iter_mut().skip(offset) {
            *v = f(*v);
        }
        HourlySeries {
            zone: self.zone.clone(),
            start_day: self.start_day,
            values,
        }
    }
}
