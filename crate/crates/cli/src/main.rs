mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use epfbench::data::{
    normalize_dst, parse_entsoe_csv, read_canonical, write_canonical, EntsoeColumns,
    TimestampZone,
};
use epfbench::evaluation::{check_coverage, rolling_backtest, SIGNIFICANCE_LEVEL};
use epfbench::{ForecastRecord, HourlySeries};

use config::{ModelEntry, RunConfig, RunFile, RunMeta, RunSection, DATA_ENV};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

const DECISIONS: &[&str] = &[
    "DST: 23-hour days get the missing hour as the mean of its neighbours; 25-hour days average the repeated hour",
    "naive timestamps are read as Europe/Brussels local time unless overridden",
    "MSTL trend forecaster: AICc choice among SES, Holt and damped Holt",
    "ML inputs and targets are quantile-transformed to a standard normal using training data only",
    "elastic-net CV: hyperparameters shared across the 24 hours; grid points that fail to converge are excluded",
    "DM test: one-sided, sample variance of the daily 1-norm loss differential, no autocorrelation correction",
    "an external model that crashes, times out or breaks protocol is stopped for the rest of the zone; completed days are kept",
    "DM matrices only include models with a forecast for every test day",
];

#[derive(Parser, Debug)]
#[command(name = "epfbench", version, about = "Day-ahead electricity price forecasting benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert raw price exports into the canonical hourly CSV for one zone.
    Ingest(IngestArgs),
    /// Run the rolling backtest and write all reports.
    Run(RunArgs),
    /// Recompute DM matrices and heatmaps from a records file.
    Dm(DmArgs),
    /// Re-emit the metric table and DM reports from a records file.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Zone code; the output file is <data-dir>/<zone>.csv.
    #[arg(long)]
    zone: String,
    /// Raw export files, in any order.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Defaults to $EPFBENCH_DATA, then ./data.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    timestamp_column: Option<String>,
    #[arg(long)]
    price_column: Option<String>,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// IANA zone for timestamps without an offset.
    #[arg(long, default_value = "Europe/Brussels")]
    timezone: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration; a run_meta.toml from an earlier run also works.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Comma-separated zone codes.
    #[arg(long, value_delimiter = ',')]
    zones: Option<Vec<String>>,
    #[arg(long)]
    test_start: Option<NaiveDate>,
    #[arg(long)]
    test_end: Option<NaiveDate>,
    #[arg(long)]
    train_days: Option<usize>,
    #[arg(long)]
    input_hours: Option<usize>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    transform_targets: Option<bool>,
    /// Worker threads for native models (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Built-in model to run; repeat to run several. Replaces the models
    /// from the config file.
    #[arg(long = "model")]
    models: Vec<String>,
    /// p-value threshold for the heatmap colouring.
    #[arg(long, default_value_t = SIGNIFICANCE_LEVEL)]
    significance: f64,
}

#[derive(Args, Debug)]
struct DmArgs {
    #[arg(long)]
    records: PathBuf,
    /// Defaults to the directory holding the records file.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = SIGNIFICANCE_LEVEL)]
    significance: f64,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Test span length for completeness; defaults to the span covered by
    /// each zone's records.
    #[arg(long)]
    expected_days: Option<usize>,
    #[arg(long, default_value_t = SIGNIFICANCE_LEVEL)]
    significance: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Run(a) => run(a),
        Command::Dm(a) => dm(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn default_data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn ingest(args: IngestArgs) -> Result<u8> {
    if !args.delimiter.is_ascii() {
        bail!("delimiter must be a single ASCII character");
    }
    let columns = EntsoeColumns {
        timestamp: args.timestamp_column,
        price: args.price_column,
        delimiter: args.delimiter as u8,
    };
    let tz: TimestampZone = args
        .timezone
        .parse()
        .map_err(|e| anyhow::anyhow!("timezone {}: {e}", args.timezone))?;

    let mut observations = Vec::new();
    for path in &args.inputs {
        let (obs, rep) = parse_entsoe_csv(path, &args.zone, &columns, tz)
            .with_context(|| format!("zone {}: {}", args.zone, path.display()))?;
        eprintln!(
            "{}: {} rows, {} empty dropped, {} duplicates collapsed",
            path.display(),
            rep.rows_read,
            rep.dropped_empty,
            rep.duplicates_collapsed
        );
        observations.extend(obs);
    }
    // files may overlap; the later file wins for a repeated instant
    observations.sort_by_key(|o| o.timestamp);
    let mut merged: Vec<epfbench::data::RawObservation> = Vec::with_capacity(observations.len());
    for o in observations {
        match merged.last_mut() {
            Some(last) if last.timestamp == o.timestamp => *last = o,
            _ => merged.push(o),
        }
    }
    let series = normalize_dst(&merged).with_context(|| format!("zone {}", args.zone))?;

    let dir = default_data_dir(args.data_dir);
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let out = dir.join(format!("{}.csv", args.zone));
    write_canonical(&series, &out)?;
    eprintln!(
        "wrote {} ({} days, {}..{})",
        out.display(),
        series.n_days(),
        series.start_day(),
        series.end_day()
    );
    Ok(EXIT_OK)
}

fn resolve_run(args: &RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => RunFile::load(p)?,
        None => RunFile::default(),
    };
    let flags = RunSection {
        zones: args.zones.clone(),
        test_start: args.test_start,
        test_end: args.test_end,
        train_days: args.train_days,
        input_hours: args.input_hours,
        data_dir: args.data_dir.clone(),
        out_dir: args.out_dir.clone(),
        seed: args.seed,
        transform_targets: args.transform_targets,
        jobs: args.jobs,
    };
    let models = if args.models.is_empty() {
        file.models
    } else {
        args.models.iter().map(|m| ModelEntry::native(m)).collect()
    };
    RunConfig::resolve(file.run.overridden_by(flags), models)
}

fn run(args: RunArgs) -> Result<u8> {
    if !(args.significance > 0.0 && args.significance < 1.0) {
        bail!("significance must lie in (0, 1)");
    }
    let cfg = resolve_run(&args)?;
    let backtest = cfg.backtest();

    // every zone is checked before anything runs or is written
    let mut data: Vec<HourlySeries> = Vec::new();
    for zone in &cfg.zones {
        let path = cfg.zone_file(zone);
        let series = read_canonical(&path, zone).with_context(|| format!("zone {zone}"))?;
        check_coverage(&series, &backtest)?;
        data.push(series);
    }
    let handles = cfg.handles()?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot size the worker pool")?;
    }

    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for series in &data {
        eprintln!(
            "{}: {} models, {}..{}",
            series.zone(),
            handles.len(),
            cfg.test_start,
            cfg.test_end
        );
        let out = rolling_backtest(series, &handles, &backtest)?;
        for f in &out.failures {
            eprintln!("  {} {} {}: {}", f.zone, f.model, f.date, f.reason);
        }
        records.extend(out.records);
        failures.extend(out.failures);
    }

    let model_names: Vec<String> = cfg.models.iter().map(|m| m.name.clone()).collect();
    emit(
        &cfg.out_dir,
        &records,
        &cfg.zones,
        &model_names,
        |_| backtest.test_days(),
        None,
        args.significance,
    )?;
    report::write_records(&cfg.out_dir.join("records.csv"), &records)?;
    report::write_failures(&cfg.out_dir.join("failures.csv"), &failures)?;

    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        dm_variance: "plain".into(),
        significance: args.significance,
        decisions: DECISIONS.iter().map(|s| s.to_string()).collect(),
    };
    let meta_path = cfg.out_dir.join("run_meta.toml");
    std::fs::write(&meta_path, toml::to_string(&cfg.to_file(Some(meta)))?)
        .with_context(|| format!("cannot write {}", meta_path.display()))?;

    if failures.is_empty() {
        eprintln!("done: {} records", records.len());
        Ok(EXIT_OK)
    } else {
        let failed = report::ordered_unique(failures.iter().map(|f| f.model.as_str()));
        eprintln!(
            "done: {} records, {} failed forecasts ({})",
            records.len(),
            failures.len(),
            failed.join(", ")
        );
        Ok(EXIT_PARTIAL)
    }
}

/// Writes metrics.csv and the per-zone DM files.
fn emit(
    out_dir: &Path,
    records: &[ForecastRecord],
    zones: &[String],
    models: &[String],
    days_for: impl Fn(&str) -> Vec<NaiveDate>,
    expected_days: Option<usize>,
    significance: f64,
) -> Result<()> {
    let mut tables = Vec::new();
    for zone in zones {
        let days = days_for(zone);
        let expected = expected_days.unwrap_or(days.len());
        tables.push((
            zone.clone(),
            report::zone_metrics(zone, records, models, expected)?,
        ));
        let (losses, skipped) = report::complete_losses(zone, records, models, &days)?;
        if !skipped.is_empty() {
            eprintln!("{zone}: DM matrix leaves out incomplete models: {}", skipped.join(", "));
        }
        report::write_dm(out_dir, zone, &losses, significance)?;
    }
    report::write_metrics(&out_dir.join("metrics.csv"), &tables)
}

fn records_context(path: &Path, out_dir: Option<PathBuf>) -> Result<(Vec<ForecastRecord>, PathBuf)> {
    let records = report::read_records(path)?;
    if records.is_empty() {
        bail!("{} holds no records", path.display());
    }
    let out = out_dir
        .or_else(|| path.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    Ok((records, out))
}

fn dm(args: DmArgs) -> Result<u8> {
    let (records, out) = records_context(&args.records, args.out_dir)?;
    let zones = report::ordered_unique(records.iter().map(|r| r.zone.as_str()));
    let models = report::ordered_unique(records.iter().map(|r| r.model.as_str()));
    for zone in &zones {
        let days = report::zone_days(zone, &records);
        let (losses, skipped) = report::complete_losses(zone, &records, &models, &days)?;
        if !skipped.is_empty() {
            eprintln!("{zone}: DM matrix leaves out incomplete models: {}", skipped.join(", "));
        }
        report::write_dm(&out, zone, &losses, args.significance)?;
    }
    Ok(EXIT_OK)
}

fn report_cmd(args: ReportArgs) -> Result<u8> {
    let (records, out) = records_context(&args.records, args.out_dir)?;
    let zones = report::ordered_unique(records.iter().map(|r| r.zone.as_str()));
    let models = report::ordered_unique(records.iter().map(|r| r.model.as_str()));
    emit(
        &out,
        &records,
        &zones,
        &models,
        |zone| report::zone_days(zone, &records),
        args.expected_days,
        args.significance,
    )?;
    Ok(EXIT_OK)
}
