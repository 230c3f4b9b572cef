//! Canonical on-disk format: header `date,hour,price`, one row per hour,
//! sorted by (date, hour), exactly 24 rows per date, prices written as the
//! shortest decimal that round-trips.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};

use super::{DataError, HourlySeries, HOURS_PER_DAY};

const HEADER: &str = "date,hour,price";

pub fn write_canonical(series: &HourlySeries, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_canonical_to(series, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

pub(crate) fn write_canonical_to<W: Write>(series: &HourlySeries, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for (i, price) in series.values().iter().enumerate() {
        let date = series.start_day() + Duration::days((i / HOURS_PER_DAY) as i64);
        // `{}` on f64 prints the shortest representation that parses back
        // to the same bits.
        writeln!(out, "{},{},{}", date.format("%Y-%m-%d"), i % HOURS_PER_DAY, price)?;
    }
    Ok(())
}

pub fn read_canonical(path: impl AsRef<Path>, zone: &str) -> Result<HourlySeries, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    read_canonical_from(BufReader::new(file), zone)
}

pub(crate) fn read_canonical_from<R: BufRead>(reader: R, zone: &str) -> Result<HourlySeries, DataError> {
    let violation = |line: usize, reason: String| DataError::FormatViolation { line, reason };
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end() == HEADER => {}
        Some(Ok(h)) => return Err(violation(1, format!("expected header {HEADER:?}, found {h:?}"))),
        Some(Err(e)) => return Err(violation(1, e.to_string())),
        None => return Err(violation(1, "empty file".into())),
    }

    let mut start: Option<NaiveDate> = None;
    let mut values = Vec::new();
    let mut line_no = 1;
    for line in lines {
        line_no += 1;
        let line = line.map_err(|e| violation(line_no, e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(date), Some(hour), Some(price), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(violation(line_no, "expected 3 fields".into()));
        };
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|e| violation(line_no, format!("bad date {date:?}: {e}")))?;
        let hour: usize = hour
            .parse()
            .map_err(|_| violation(line_no, format!("bad hour {hour:?}")))?;
        let price: f64 = price
            .parse()
            .map_err(|_| violation(line_no, format!("bad price {price:?}")))?;
        if !price.is_finite() {
            return Err(violation(line_no, format!("non-finite price {price}")));
        }

        let start_day = *start.get_or_insert(date);
        let i = values.len();
        let want_date = start_day + Duration::days((i / HOURS_PER_DAY) as i64);
        let want_hour = i % HOURS_PER_DAY;
        if date != want_date || hour != want_hour {
            return Err(violation(
                line_no,
                format!("expected {want_date} hour {want_hour}, found {date} hour {hour}"),
            ));
        }
        values.push(price);
    }

    if values.len() % HOURS_PER_DAY != 0 {
        return Err(violation(
            line_no,
            format!("{} rows is not a whole number of days", values.len()),
        ));
    }
    let start_day = start.ok_or_else(|| violation(line_no, "no data rows".into()))?;
    HourlySeries::new(zone, start_day, values).map_err(|e| violation(line_no, e.to_string()))
}
