use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::offset::LocalResult;
use chrono::{DateTime, FixedOffset, NaiveDateTime, Offset, TimeZone};
use chrono_tz::Tz;

use super::{DataError, RawObservation};

/// Column selection and time zone handling for transparency-platform exports.
#[derive(Debug, Clone)]
pub struct EntsoeColumns {
    /// Timestamp column header. `None` picks the first header that looks like
    /// a time column (`MTU...`, `Datetime...`, `timestamp`, `time`).
    pub timestamp: Option<String>,
    /// Price column header. `None` picks the first header mentioning "price".
    pub price: Option<String>,
    pub delimiter: u8,
}

impl Default for EntsoeColumns {
    fn default() -> Self {
        Self {
            timestamp: None,
            price: None,
            delimiter: b',',
        }
    }
}

/// Market time zone used to interpret naive timestamps and to convert
/// offset-bearing ones to local market time.
#[derive(Debug, Clone, Copy)]
pub struct TimestampZone(pub Tz);

impl Default for TimestampZone {
    fn default() -> Self {
        // All zones in the benchmark trade on CET/CEST.
        Self(chrono_tz::Europe::Brussels)
    }
}

impl std::str::FromStr for TimestampZone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<Tz>().map(TimestampZone).map_err(|e| e.to_string())
    }
}

/// Bookkeeping from a parse: what was dropped or merged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub rows_read: usize,
    pub dropped_empty: usize,
    pub duplicates_collapsed: usize,
}

pub fn parse_entsoe_csv(
    path: impl AsRef<Path>,
    zone: &str,
    columns: &EntsoeColumns,
    tz: TimestampZone,
) -> Result<(Vec<RawObservation>, ParseReport), DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    parse_entsoe_reader(file, zone, columns, tz)
}

/// Parses delimiter-separated price rows. Output is sorted by instant with
/// duplicate instants collapsed to the last row seen.
pub fn parse_entsoe_reader<R: Read>(
    reader: R,
    zone: &str,
    columns: &EntsoeColumns,
    tz: TimestampZone,
) -> Result<(Vec<RawObservation>, ParseReport), DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(columns.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| DataError::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let ts_idx = find_column(&headers, columns.timestamp.as_deref(), is_time_header)
        .ok_or_else(|| DataError::MalformedRow {
            line: 1,
            reason: "timestamp column not found".into(),
        })?;
    let price_idx = find_column(&headers, columns.price.as_deref(), |h| {
        h.to_ascii_lowercase().contains("price")
    })
    .ok_or_else(|| DataError::MalformedRow {
        line: 1,
        reason: "price column not found".into(),
    })?;

    let mut report = ParseReport::default();
    let mut resolver = NaiveResolver::new(tz.0);
    let mut rows: Vec<(usize, RawObservation)> = Vec::new();

    for (seq, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| DataError::MalformedRow {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(seq + 2);
        report.rows_read += 1;

        let price_field = record.get(price_idx).unwrap_or("");
        if is_empty_price(price_field) {
            report.dropped_empty += 1;
            continue;
        }
        let price: f64 = price_field.parse().map_err(|_| DataError::MalformedRow {
            line,
            reason: format!("unparseable price {price_field:?}"),
        })?;
        if !price.is_finite() {
            return Err(DataError::MalformedRow {
                line,
                reason: format!("non-finite price {price_field:?}"),
            });
        }

        let ts_field = record.get(ts_idx).unwrap_or("");
        let timestamp = parse_timestamp(ts_field, &mut resolver).map_err(|reason| {
            DataError::MalformedRow { line, reason }
        })?;

        rows.push((
            seq,
            RawObservation {
                timestamp,
                price,
                zone: zone.to_string(),
            },
        ));
    }

    // Stable ordering by instant, input order among equal instants.
    rows.sort_by_key(|(seq, obs)| (obs.timestamp, *seq));
    let mut out: Vec<RawObservation> = Vec::with_capacity(rows.len());
    for (_, obs) in rows {
        match out.last_mut() {
            Some(prev) if prev.timestamp == obs.timestamp => {
                *prev = obs;
                report.duplicates_collapsed += 1;
            }
            _ => out.push(obs),
        }
    }
    if out.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok((out, report))
}

fn find_column(
    headers: &csv::StringRecord,
    wanted: Option<&str>,
    guess: impl Fn(&str) -> bool,
) -> Option<usize> {
    match wanted {
        Some(name) => headers.iter().position(|h| h == name),
        None => headers.iter().position(guess),
    }
}

fn is_time_header(h: &str) -> bool {
    let l = h.to_ascii_lowercase();
    l.starts_with("mtu") || l.starts_with("datetime") || l == "timestamp" || l == "time"
}

fn is_empty_price(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f.eq_ignore_ascii_case("n/e") || f.eq_ignore_ascii_case("n/a")
}

/// Resolves naive local times in the market zone. On the fall-back day the
/// repeated hour appears twice; the first occurrence gets the summer offset
/// and later ones the winter offset.
struct NaiveResolver {
    tz: Tz,
    seen_ambiguous: HashSet<NaiveDateTime>,
}

impl NaiveResolver {
    fn new(tz: Tz) -> Self {
        Self {
            tz,
            seen_ambiguous: HashSet::new(),
        }
    }

    fn resolve(&mut self, naive: NaiveDateTime) -> Result<DateTime<FixedOffset>, String> {
        match self.tz.from_local_datetime(&naive) {
            LocalResult::Single(t) => Ok(t.fixed_offset()),
            LocalResult::Ambiguous(early, late) => {
                if self.seen_ambiguous.insert(naive) {
                    Ok(early.fixed_offset())
                } else {
                    Ok(late.fixed_offset())
                }
            }
            LocalResult::None => Err(format!("local time {naive} does not exist in {}", self.tz)),
        }
    }

    fn to_market(&self, t: DateTime<FixedOffset>) -> DateTime<FixedOffset> {
        let local = t.with_timezone(&self.tz);
        let offset = local.offset().fix();
        t.with_timezone(&offset)
    }
}

const OFFSET_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M%:z",
    "%Y-%m-%dT%H:%M%:z",
    "%Y-%m-%d %H:%M:%S%:z",
    "%Y-%m-%dT%H:%M:%S%:z",
    "%Y-%m-%d %H:%M%z",
    "%Y-%m-%dT%H:%M%z",
    "%Y-%m-%d %H:%M:%S%z",
    "%Y-%m-%dT%H:%M:%S%z",
];

const NAIVE_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%d.%m.%Y %H:%M",
    "%d/%m/%Y %H:%M",
];

fn parse_timestamp(field: &str, resolver: &mut NaiveResolver) -> Result<DateTime<FixedOffset>, String> {
    // MTU intervals look like "01.01.2024 00:00 - 01.01.2024 01:00 (CET/CEST)";
    // the interval start is the delivery hour.
    let mut text = field.trim();
    let mut explicit_offset: Option<i32> = None;
    if let Some(open) = text.rfind('(') {
        let tag = text[open..].trim_matches(|c| c == '(' || c == ')' || c == ' ');
        explicit_offset = match tag {
            "CET" => Some(3600),
            "CEST" => Some(7200),
            "UTC" => Some(0),
            _ => None,
        };
        text = text[..open].trim_end();
    }
    if let Some(dash) = text.find(" - ") {
        text = text[..dash].trim_end();
    }
    if text.is_empty() {
        return Err("empty timestamp".into());
    }

    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(resolver.to_market(t));
    }
    for fmt in OFFSET_FORMATS {
        if let Ok(t) = DateTime::parse_from_str(text, fmt) {
            return Ok(resolver.to_market(t));
        }
    }
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
            return match explicit_offset {
                Some(secs) => {
                    let offset = FixedOffset::east_opt(secs).expect("valid offset");
                    let t = offset
                        .from_local_datetime(&naive)
                        .single()
                        .ok_or_else(|| format!("invalid local time {naive}"))?;
                    Ok(resolver.to_market(t))
                }
                None => resolver.resolve(naive),
            };
        }
    }
    Err(format!("unparseable timestamp {field:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Timelike;

    fn parse(text: &str) -> Result<(Vec<RawObservation>, ParseReport), DataError> {
        parse_entsoe_reader(
            text.as_bytes(),
            "DE-LU",
            &EntsoeColumns::default(),
            TimestampZone::default(),
        )
    }

    #[test]
    fn well_formed_rows_come_out_sorted() {
        let csv = "timestamp,price\n\
                   2024-01-01T02:00:00+01:00,30.5\n\
                   2024-01-01T00:00:00+01:00,10\n\
                   2024-01-01T01:00:00+01:00,-5.25\n";
        let (obs, report) = parse(csv).unwrap();
        let prices: Vec<f64> = obs.iter().map(|o| o.price).collect();
        assert_eq!(prices, vec![10.0, -5.25, 30.5]);
        assert_eq!(report.rows_read, 3);
        assert!(obs.iter().all(|o| o.zone == "DE-LU"));
    }

    #[test]
    fn duplicate_timestamp_last_wins() {
        let csv = "timestamp,price\n\
                   2024-01-01 00:00,10\n\
                   2024-01-01 01:00,11\n\
                   2024-01-01 00:00,12\n";
        let (obs, report) = parse(csv).unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].price, 12.0);
        assert_eq!(report.duplicates_collapsed, 1);
    }

    #[test]
    fn bad_price_is_malformed_row_with_line() {
        let csv = "timestamp,price\n2024-01-01 00:00,10\n2024-01-01 01:00,abc\n";
        match parse(csv) {
            Err(DataError::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_prices_are_dropped_and_counted() {
        let csv = "timestamp,price\n2024-01-01 00:00,\n2024-01-01 01:00,n/e\n2024-01-01 02:00,3\n";
        let (obs, report) = parse(csv).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(report.dropped_empty, 2);
    }

    #[test]
    fn all_rows_empty_is_empty_input() {
        let csv = "timestamp,price\n2024-01-01 00:00,\n";
        assert!(matches!(parse(csv), Err(DataError::EmptyInput)));
    }

    #[test]
    fn missing_file_is_unreadable() {
        let err = parse_entsoe_csv(
            "/nonexistent/prices.csv",
            "AT",
            &EntsoeColumns::default(),
            TimestampZone::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::FileUnreadable { .. }));
    }

    #[test]
    fn mtu_interval_format_with_semicolons() {
        let csv = "MTU (CET/CEST);Day-ahead Price [EUR/MWh];Currency\n\
                   27.10.2024 02:00 - 27.10.2024 03:00 (CEST);70.1;EUR\n\
                   27.10.2024 02:00 - 27.10.2024 03:00 (CET);60.1;EUR\n";
        let cols = EntsoeColumns {
            delimiter: b';',
            ..Default::default()
        };
        let (obs, _) = parse_entsoe_reader(csv.as_bytes(), "DE-LU", &cols, TimestampZone::default())
            .unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].timestamp.hour(), 2);
        assert_eq!(obs[1].timestamp.hour(), 2);
        assert!(obs[0].timestamp < obs[1].timestamp);
    }

    #[test]
    fn naive_fall_back_hour_resolves_in_order() {
        let csv = "timestamp,price\n\
                   2024-10-27 02:00,10\n\
                   2024-10-27 02:00,20\n";
        let (obs, report) = parse(csv).unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(report.duplicates_collapsed, 0);
        assert_eq!(obs[0].price, 10.0);
        assert_eq!(obs[0].timestamp.offset().local_minus_utc(), 7200);
        assert_eq!(obs[1].timestamp.offset().local_minus_utc(), 3600);
    }

    #[test]
    fn utc_input_is_converted_to_market_time() {
        let csv = "timestamp,price\n2023-12-31T23:00:00Z,42\n";
        let (obs, _) = parse(csv).unwrap();
        assert_eq!(obs[0].timestamp.hour(), 0);
        assert_eq!(obs[0].timestamp.date_naive().to_string(), "2024-01-01");
    }

    #[test]
    fn explicit_columns() {
        let csv = "a,when,val\nx,2024-01-01 00:00,1.5\n";
        let cols = EntsoeColumns {
            timestamp: Some("when".into()),
            price: Some("val".into()),
            delimiter: b',',
        };
        let (obs, _) = parse_entsoe_reader(csv.as_bytes(), "AT", &cols, TimestampZone::default())
            .unwrap();
        assert_eq!(obs[0].price, 1.5);
    }
}
