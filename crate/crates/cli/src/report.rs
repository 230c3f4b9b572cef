//! Artifact files: forecast records, failures, metric tables, DM matrices
//! and heatmaps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use epfbench::evaluation::{
    daily_l1_losses, dm_matrix, metric_table, DmMatrix, ForecastFailure, LossSeries, MetricRow,
};
use epfbench::{ForecastRecord, HOURS_PER_DAY};

pub fn write_records(path: &Path, records: &[ForecastRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["model".to_string(), "zone".into(), "date".into()];
    header.extend((0..HOURS_PER_DAY).map(|h| format!("p{h}")));
    header.extend((0..HOURS_PER_DAY).map(|h| format!("a{h}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.model.clone(), r.zone.clone(), r.target_date.to_string()];
        row.extend(r.predictions.iter().map(|v| v.to_string()));
        row.extend(r.actuals.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ForecastRecord>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let expected = 3 + 2 * HOURS_PER_DAY;
    if rdr.headers()?.len() != expected {
        bail!("{}: expected {expected} columns", path.display());
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.with_context(|| format!("{}: line {line}", path.display()))?;
        if row.len() != expected {
            bail!("{}: line {line} has {} columns", path.display(), row.len());
        }
        let num = |j: usize| -> Result<f64> {
            row[j]
                .parse::<f64>()
                .with_context(|| format!("{}: line {line}, column {}", path.display(), j + 1))
        };
        let mut predictions = [0.0; HOURS_PER_DAY];
        let mut actuals = [0.0; HOURS_PER_DAY];
        for h in 0..HOURS_PER_DAY {
            predictions[h] = num(3 + h)?;
            actuals[h] = num(3 + HOURS_PER_DAY + h)?;
        }
        out.push(ForecastRecord {
            model: row[0].to_string(),
            zone: row[1].to_string(),
            target_date: row[2]
                .parse()
                .with_context(|| format!("{}: line {line}, bad date", path.display()))?,
            predictions,
            actuals,
        });
    }
    Ok(out)
}

pub fn write_failures(path: &Path, failures: &[ForecastFailure]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["model", "zone", "date", "reason"])?;
    for f in failures {
        w.write_record([&f.model, &f.zone, &f.date.to_string(), &f.reason])?;
    }
    w.flush()?;
    Ok(())
}

/// Distinct values in order of first appearance.
pub fn ordered_unique<'a>(items: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Metric rows for one zone. Models listed in `models` that produced no
/// records get a row with zero completeness and empty metrics.
pub fn zone_metrics(
    zone: &str,
    records: &[ForecastRecord],
    models: &[String],
    expected_days: usize,
) -> Result<Vec<(String, Option<MetricRow>)>> {
    let zone_records: Vec<ForecastRecord> =
        records.iter().filter(|r| r.zone == zone).cloned().collect();
    let rows = if zone_records.is_empty() {
        Vec::new()
    } else {
        metric_table(&zone_records, expected_days)?
    };
    Ok(models
        .iter()
        .map(|m| (m.clone(), rows.iter().find(|r| &r.model == m).cloned()))
        .collect())
}

pub fn write_metrics(path: &Path, zones: &[(String, Vec<(String, Option<MetricRow>)>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record([
        "zone", "model", "n_days", "completeness", "mae", "mae_rank", "mae_marker", "rmse",
        "rmse_rank", "rmse_marker", "smape", "smape_rank", "smape_marker",
    ])?;
    for (zone, rows) in zones {
        for (model, row) in rows {
            match row {
                Some(r) => w.write_record([
                    zone.clone(),
                    model.clone(),
                    r.n_days.to_string(),
                    r.completeness.to_string(),
                    r.mae.to_string(),
                    r.mae_rank.to_string(),
                    r.mae_rank.marker().to_string(),
                    r.rmse.to_string(),
                    r.rmse_rank.to_string(),
                    r.rmse_rank.marker().to_string(),
                    r.smape.to_string(),
                    r.smape_rank.to_string(),
                    r.smape_rank.marker().to_string(),
                ])?,
                None => {
                    let mut row = vec![zone.clone(), model.clone(), "0".into(), "0".into()];
                    row.extend(std::iter::repeat(String::new()).take(9));
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Loss series for the models of `zone` whose records cover `days`
/// completely. Returns the series and the names of models left out.
pub fn complete_losses(
    zone: &str,
    records: &[ForecastRecord],
    models: &[String],
    days: &[NaiveDate],
) -> Result<(Vec<LossSeries>, Vec<String>)> {
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for m in models {
        let own: Vec<ForecastRecord> = records
            .iter()
            .filter(|r| r.zone == zone && &r.model == m)
            .cloned()
            .collect();
        match daily_l1_losses(&own) {
            Ok(l) if l.dates == days => kept.push(l),
            _ => skipped.push(m.clone()),
        }
    }
    Ok((kept, skipped))
}

/// Every day from the first to the last record date of a zone.
pub fn zone_days(zone: &str, records: &[ForecastRecord]) -> Vec<NaiveDate> {
    let dates = records.iter().filter(|r| r.zone == zone).map(|r| r.target_date);
    let (Some(first), Some(last)) = (dates.clone().min(), dates.max()) else {
        return Vec::new();
    };
    first.iter_days().take_while(|d| *d <= last).collect()
}

pub fn write_dm(out_dir: &Path, zone: &str, losses: &[LossSeries], significance: f64) -> Result<DmMatrix> {
    let matrix = if losses.is_empty() {
        DmMatrix {
            zone: zone.to_string(),
            models: Vec::new(),
            p: Vec::new(),
        }
    } else {
        dm_matrix(losses)?
    };
    let csv_path = out_dir.join(format!("dm_{zone}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;
    let mut header = vec!["model".to_string()];
    header.extend(matrix.models.iter().cloned());
    w.write_record(&header)?;
    for (i, m) in matrix.models.iter().enumerate() {
        let mut row = vec![m.clone()];
        row.extend(matrix.p[i].iter().map(|p| p.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    let svg_path = out_dir.join(format!("dm_{zone}.svg"));
    fs::write(&svg_path, render_heatmap(&matrix, significance))
        .with_context(|| format!("cannot write {}", svg_path.display()))?;
    Ok(matrix)
}

pub const NOT_SIGNIFICANT: &str = "#000000";
pub const DIAGONAL: &str = "#bdbdbd";
const RAMP_DARK: (f64, f64, f64) = (0.0, 104.0, 55.0);
const RAMP_LIGHT: (f64, f64, f64) = (255.0, 255.0, 204.0);

/// Fill for one cell: black above the threshold, otherwise dark green at
/// p = 0 fading to light yellow at the threshold.
pub fn cell_colour(p: Option<f64>, significance: f64) -> String {
    let Some(p) = p else {
        return DIAGONAL.to_string();
    };
    if p > significance {
        return NOT_SIGNIFICANT.to_string();
    }
    let t = (p / significance).clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(RAMP_DARK.0, RAMP_LIGHT.0),
        mix(RAMP_DARK.1, RAMP_LIGHT.1),
        mix(RAMP_DARK.2, RAMP_LIGHT.2)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Standalone SVG heatmap. Cell (i, j) is the p-value for "row model i has
/// smaller losses than column model j".
pub fn render_heatmap(m: &DmMatrix, significance: f64) -> String {
    let k = m.models.len();
    let cell = 36.0;
    let longest = m.models.iter().map(|s| s.chars().count()).max().unwrap_or(1) as f64;
    let label = 7.0 * longest + 16.0;
    let left = label + 24.0;
    let top = label + 40.0;
    let grid = cell * k as f64;
    let legend_x = left + grid + 30.0;
    let width = legend_x + 110.0;
    let height = (top + grid + 50.0).max(top + 200.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{left:.1}" y="20" font-size="14">DM test p-values, {}</text>"#,
        escape(&m.zone)
    );
    for (i, name) in m.models.iter().enumerate() {
        let y = top + cell * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            escape(name)
        );
        let x = left + cell * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(
            s,
            r#"<text transform="translate({x:.1},{:.1}) rotate(-90)">{}</text>"#,
            top - 6.0,
            escape(name)
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(14,{:.1}) rotate(-90)" text-anchor="middle">row model (smaller losses?)</text>"#,
        top + grid / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">column model</text>"#,
        left + grid / 2.0,
        top + grid + 30.0
    );
    for i in 0..k {
        for j in 0..k {
            let p = if i == j { None } else { m.p[i][j] };
            let tip = match p {
                Some(v) => format!("{} vs {}: p = {v:.4}", m.models[i], m.models[j]),
                None if i == j => m.models[i].clone(),
                None => format!("{} vs {}: identical losses", m.models[i], m.models[j]),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="{}" stroke="#ffffff"><title>{}</title></rect>"##,
                left + cell * j as f64,
                top + cell * i as f64,
                cell_colour(p, significance),
                escape(&tip)
            );
        }
    }

    // legend
    let steps = 10;
    let bar = 150.0;
    for step in 0..steps {
        let p = significance * step as f64 / (steps - 1) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{legend_x:.1}" y="{:.1}" width="18" height="{:.1}" fill="{}"/>"#,
            top + bar * step as f64 / steps as f64,
            bar / steps as f64,
            cell_colour(Some(p), significance)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">p = 0</text>"#, legend_x + 24.0, top + 10.0);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">p = {significance}</text>"#,
        legend_x + 24.0,
        top + bar
    );
    let _ = writeln!(
        s,
        r#"<rect x="{legend_x:.1}" y="{:.1}" width="18" height="15" fill="{NOT_SIGNIFICANT}"/>"#,
        top + bar + 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">p &gt; {significance}</text>"#,
        legend_x + 24.0,
        top + bar + 22.0
    );
    s.push_str("</svg>\n");
    s
}
