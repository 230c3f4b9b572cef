use super::{EvalError, ForecastRecord};

/// Compensated running sum (Neumaier).
#[derive(Debug, Default, Clone, Copy)]
struct Sum {
    total: f64,
    compensation: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.total + x;
        if self.total.abs() >= x.abs() {
            self.compensation += (self.total - t) + x;
        } else {
            self.compensation += (x - t) + self.total;
        }
        self.total = t;
    }

    fn value(self) -> f64 {
        self.total + self.compensation
    }
}

fn mean_over_pairs(
    records: &[ForecastRecord],
    term: impl Fn(f64, f64) -> f64,
) -> Result<f64, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut sum = Sum::default();
    let mut count = 0usize;
    for r in records {
        for (y, yhat) in r.actuals.iter().zip(&r.predictions) {
            sum.add(term(*y, *yhat));
            count += 1;
        }
    }
    Ok(sum.value() / count as f64)
}

/// Mean absolute error over every (record, hour) pair.
pub fn compute_mae(records: &[ForecastRecord]) -> Result<f64, EvalError> {
    mean_over_pairs(records, |y, yhat| (y - yhat).abs())
}

pub fn compute_rmse(records: &[ForecastRecord]) -> Result<f64, EvalError> {
    mean_over_pairs(records, |y, yhat| (y - yhat) * (y - yhat)).map(f64::sqrt)
}

/// Percentage error `100/n · Σ |y − ŷ| / (|y| + |ŷ|)`, with 0/0 terms taken
/// as 0. Without the usual factor 2 the value is bounded by 100.
pub fn compute_smape(records: &[ForecastRecord]) -> Result<f64, EvalError> {
    mean_over_pairs(records, smape_term).map(|m| 100.0 * m)
}

fn smape_term(y: f64, yhat: f64) -> f64 {
    let denom = y.abs() + yhat.abs();
    if denom == 0.0 {
        0.0
    } else {
        (y - yhat).abs() / denom
    }
}

pub(crate) fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = Sum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}
