use chrono::{Duration, NaiveDate, Timelike};

use super::{DataError, HourlySeries, RawObservation, HOURS_PER_DAY};

/// Brings every local market day to exactly 24 values.
///
/// A 23-hour day gets the missing hour as the mean of its two temporal
/// neighbours (the single neighbour at the edge of the data); a 25-hour day
/// has its repeated hour replaced by the mean of both observations. Any other
/// hour count, or a missing calendar day, is rejected.
pub fn normalize_dst(observations: &[RawObservation]) -> Result<HourlySeries, DataError> {
    let first = observations.first().ok_or(DataError::EmptyInput)?;
    let zone = first.zone.clone();

    // Group by local date; observations arrive in instant order.
    let mut days: Vec<(NaiveDate, Vec<(u32, f64)>)> = Vec::new();
    for obs in observations {
        let date = obs.timestamp.date_naive();
        let hour = obs.timestamp.hour();
        match days.last_mut() {
            Some((d, hours)) if *d == date => hours.push((hour, obs.price)),
            Some((d, _)) if date < *d => {
                return Err(DataError::IrregularDay {
                    date,
                    detail: "observations are not sorted by time".into(),
                })
            }
            _ => days.push((date, vec![(hour, obs.price)])),
        }
    }

    for pair in days.windows(2) {
        if pair[1].0 != pair[0].0 + Duration::days(1) {
            return Err(DataError::NonContiguous {
                after: pair[0].0,
                before: pair[1].0,
            });
        }
    }

    // Per-day hour counts first, so short days report as GapTooLarge.
    for (date, hours) in &days {
        if !(23..=25).contains(&hours.len()) {
            return Err(DataError::GapTooLarge {
                date: *date,
                observed: hours.len(),
            });
        }
    }
    // Consecutive observations must be one real hour apart; only a clock
    // change may then produce 23 or 25 local hours.
    for pair in observations.windows(2) {
        let step = pair[1].timestamp - pair[0].timestamp;
        if step != Duration::hours(1) {
            return Err(DataError::IrregularDay {
                date: pair[1].timestamp.date_naive(),
                detail: format!(
                    "{} minute step before local {:02}:00",
                    step.num_minutes(),
                    pair[1].timestamp.hour()
                ),
            });
        }
    }

    let mut values = Vec::with_capacity(days.len() * HOURS_PER_DAY);
    for (i, (date, hours)) in days.iter().enumerate() {
        let date = *date;
        let mut slots: [Vec<f64>; HOURS_PER_DAY] = Default::default();
        for &(h, p) in hours {
            slots[h as usize].push(p);
        }
        let irregular = |detail: &str| DataError::IrregularDay {
            date,
            detail: detail.to_string(),
        };
        match hours.len() {
            24 => {
                if slots.iter().any(|s| s.len() != 1) {
                    return Err(irregular("24 observations but hours are not 0..23"));
                }
                values.extend(slots.iter().map(|s| s[0]));
            }
            23 => {
                let missing: Vec<usize> = (0..HOURS_PER_DAY).filter(|&h| slots[h].is_empty()).collect();
                if missing.len() != 1 || slots.iter().any(|s| s.len() > 1) {
                    return Err(irregular("23 observations without a single skipped hour"));
                }
                let h = missing[0];
                let before = if h > 0 {
                    Some(slots[h - 1][0])
                } else {
                    i.checked_sub(1)
                        .and_then(|p| days[p].1.last())
                        .map(|&(_, p)| p)
                };
                let after = if h + 1 < HOURS_PER_DAY {
                    Some(slots[h + 1][0])
                } else {
                    days.get(i + 1).and_then(|d| d.1.first()).map(|&(_, p)| p)
                };
                let filled = match (before, after) {
                    (Some(a), Some(b)) => (a + b) / 2.0,
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!("a 23-hour day always has a neighbour"),
                };
                for (hour, slot) in slots.iter().enumerate() {
                    values.push(if hour == h { filled } else { slot[0] });
                }
            }
            25 => {
                let repeated: Vec<usize> = (0..HOURS_PER_DAY).filter(|&h| slots[h].len() == 2).collect();
                if repeated.len() != 1 || slots.iter().any(|s| s.is_empty()) {
                    return Err(irregular("25 observations without a single repeated hour"));
                }
                values.extend(slots.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64));
            }
            observed => return Err(DataError::GapTooLarge { date, observed }),
        }
    }

    HourlySeries::new(zone, days[0].0, values)
}
