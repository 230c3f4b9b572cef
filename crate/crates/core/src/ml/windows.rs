use chrono::{Days, NaiveDate};

use super::MlError;
use crate::data::{HourlySeries, HOURS_PER_DAY};

/// Default input length: one week of hourly prices.
pub const DEFAULT_INPUT_HOURS: usize = 168;

/// Supervised samples with one row per target day.
///
/// Row `i` of `inputs` holds the hours immediately preceding the day in
/// `sample_days[i]`, whose 24 prices are row `i` of `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<[f64; HOURS_PER_DAY]>,
    pub sample_days: Vec<NaiveDate>,
}

impl WindowDataset {
    /// Builds day-stride windows over `values`, a whole number of days
    /// starting at `start_day`.
    pub fn from_values(
        values: &[f64],
        start_day: NaiveDate,
        input_hours: usize,
    ) -> Result<Self, MlError> {
        if input_hours == 0 || input_hours % HOURS_PER_DAY != 0 {
            return Err(MlError::InvalidParameter(format!(
                "input_hours must be a positive multiple of 24, got {input_hours}"
            )));
        }
        if values.len() % HOURS_PER_DAY != 0 {
            return Err(MlError::InvalidParameter(format!(
                "series length {} is not a whole number of days",
                values.len()
            )));
        }
        let input_days = input_hours / HOURS_PER_DAY;
        let n_days = values.len() / HOURS_PER_DAY;
        if n_days <= input_days {
            return Err(MlError::TooShort {
                needed: input_days + 1,
                got: n_days,
            });
        }
        let mut data = WindowDataset {
            inputs: Vec::with_capacity(n_days - input_days),
            targets: Vec::with_capacity(n_days - input_days),
            sample_days: Vec::with_capacity(n_days - input_days),
        };
        for d in input_days..n_days {
            let start = d * HOURS_PER_DAY;
            data.inputs.push(values[start - input_hours..start].to_vec());
            let mut target = [0.0; HOURS_PER_DAY];
            target.copy_from_slice(&values[start..start + HOURS_PER_DAY]);
            data.targets.push(target);
            data.sample_days.push(start_day + Days::new(d as u64));
        }
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Target column for one delivery hour.
    pub fn target_hour(&self, hour: usize) -> Vec<f64> {
        self.targets.iter().map(|t| t[hour]).collect()
    }

    /// The first `n` samples.
    pub fn head(&self, n: usize) -> WindowDataset {
        WindowDataset {
            inputs: self.inputs[..n].to_vec(),
            targets: self.targets[..n].to_vec(),
            sample_days: self.sample_days[..n].to_vec(),
        }
    }
}

/// Week-long windows over a price series.
pub fn build_windows(training: &HourlySeries) -> Result<WindowDataset, MlError> {
    WindowDataset::from_values(training.values(), training.start_day(), DEFAULT_INPUT_HOURS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(days: usize) -> HourlySeries {
        let values: Vec<f64> = (0..days * 24).map(|i| i as f64).collect();
        HourlySeries::new("DE", NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn eighty_four_days_give_seventy_seven_samples() {
        let w = build_windows(&series(84)).unwrap();
        assert_eq!(w.len(), 77);
        assert!(w.inputs.iter().all(|r| r.len() == 168));
        // the first target day is day 8
        assert_eq!(w.sample_days[0], NaiveDate::from_ymd_opt(2024, 1, 8).unwrap());
        assert_eq!(w.targets[0][0], 168.0);
        assert_eq!(w.inputs[0][167], 167.0);
        assert_eq!(w.inputs[76][0], (76 * 24) as f64);
    }

    #[test]
    fn minimal_lengths() {
        assert_eq!(build_windows(&series(8)).unwrap().len(), 1);
        assert!(matches!(
            build_windows(&series(7)),
            Err(MlError::TooShort { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn input_rows_immediately_precede_targets() {
        let w = WindowDataset::from_values(
            &(0..240).map(f64::from).collect::<Vec<_>>(),
            NaiveDate::from_ymd_opt(2024, 3, 1).unwrap(),
            48,
        )
        .unwrap();
        assert_eq!(w.len(), 8);
        for (x, y) in w.inputs.iter().zip(&w.targets) {
            assert_eq!(x.last().unwrap() + 1.0, y[0]);
        }
    }
}
