use std::fmt;

use super::metrics::{compute_mae, compute_rmse, compute_smape};
use super::{EvalError, ForecastRecord};

/// Position of a value among the models of one zone (1 = smallest).
/// Equal values share a rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rank(pub usize);

impl Rank {
    /// Marker for the three best values, empty otherwise.
    pub fn marker(self) -> &'static str {
        match self.0 {
            1 => "smallest",
            2 => "second",
            3 => "third",
            _ => "",
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub zone: String,
    pub n_days: usize,
    /// Completed days over expected days.
    pub completeness: f64,
    pub mae: f64,
    pub rmse: f64,
    pub smape: f64,
    pub mae_rank: Rank,
    pub rmse_rank: Rank,
    pub smape_rank: Rank,
}

fn ranks(values: &[f64]) -> Vec<Rank> {
    values
        .iter()
        .map(|v| Rank(1 + values.iter().filter(|w| *w < v).count()))
        .collect()
}

/// One row per (model, zone) in order of first appearance, zones grouped.
/// `expected_days` is the length of the test span for completeness.
pub fn metric_table(
    records: &[ForecastRecord],
    expected_days: usize,
) -> Result<Vec<MetricRow>, EvalError> {
    let mut zones: Vec<&str> = Vec::new();
    for r in records {
        if !zones.contains(&r.zone.as_str()) {
            zones.push(&r.zone);
        }
    }
    let mut rows = Vec::new();
    for zone in zones {
        let mut models: Vec<&str> = Vec::new();
        for r in records.iter().filter(|r| r.zone == zone) {
            if !models.contains(&r.model.as_str()) {
                models.push(&r.model);
            }
        }
        let mut zone_rows = Vec::with_capacity(models.len());
        for model in models {
            let group: Vec<ForecastRecord> = records
                .iter()
                .filter(|r| r.zone == zone && r.model == model)
                .cloned()
                .collect();
            zone_rows.push(MetricRow {
                model: model.to_string(),
                zone: zone.to_string(),
                n_days: group.len(),
                completeness: if expected_days == 0 {
                    1.0
                } else {
                    group.len() as f64 / expected_days as f64
                },
                mae: compute_mae(&group)?,
                rmse: compute_rmse(&group)?,
                smape: compute_smape(&group)?,
                mae_rank: Rank(0),
                rmse_rank: Rank(0),
                smape_rank: Rank(0),
            });
        }
        let mae = ranks(&zone_rows.iter().map(|r| r.mae).collect::<Vec<_>>());
        let rmse = ranks(&zone_rows.iter().map(|r| r.rmse).collect::<Vec<_>>());
        let smape = ranks(&zone_rows.iter().map(|r| r.smape).collect::<Vec<_>>());
        for (i, row) in zone_rows.iter_mut().enumerate() {
            row.mae_rank = mae[i];
            row.rmse_rank = rmse[i];
            row.smape_rank = smape[i];
        }
        rows.extend(zone_rows);
    }
    Ok(rows)
}
