use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use chrono::{Duration, NaiveDate, TimeZone, Utc};

const BIN: &str = env!("CARGO_BIN_EXE_epfbench");

fn epfbench(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("EPFBENCH_DATA")
        .output()
        .expect("epfbench runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// The protocol fixture lives in the core crate; build it on demand when
/// this crate is tested on its own.
fn echo_forecaster() -> &'static Path {
    static PATH: OnceLock<PathBuf> = OnceLock::new();
    PATH.get_or_init(|| {
        let dir = Path::new(BIN).parent().unwrap();
        let path = dir.join(format!("echo-forecaster{}", std::env::consts::EXE_SUFFIX));
        if !path.exists() {
            let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
            let mut cmd = Command::new(cargo);
            cmd.args(["build", "-p", "epfbench-core", "--bin", "echo-forecaster"]);
            if dir.ends_with("release") {
                cmd.arg("--release");
            }
            assert!(cmd.status().unwrap().success());
        }
        path
    })
}

fn write_zone(dir: &Path, zone: &str, start: NaiveDate, days: usize, shift: f64) {
    let mut text = String::from("date,hour,price\n");
    for d in 0..days {
        let date = start + Duration::days(d as i64);
        for h in 0..24 {
            let t = (d * 24 + h) as f64;
            let v = shift + 50.0 + 15.0 * (t / 24.0 * std::f64::consts::TAU).sin() + ((d * 7 + h * 13) % 17) as f64;
            text.push_str(&format!("{date},{h},{v}\n"));
        }
    }
    fs::write(dir.join(format!("{zone}.csv")), text).unwrap();
}

struct Desk {
    _tmp: tempfile::TempDir,
    data: PathBuf,
    root: PathBuf,
}

fn desk() -> Desk {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let data = root.join("data");
    fs::create_dir_all(&data).unwrap();
    write_zone(&data, "DE", NaiveDate::from_ymd_opt(2023, 12, 1).unwrap(), 50, 0.0);
    Desk {
        _tmp: tmp,
        data,
        root,
    }
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

fn desk_config(d: &Desk, out: &str, extra_models: &str) -> PathBuf {
    let text = format!(
        r#"[run]
zones = ["DE"]
test_start = "2024-01-01"
test_end = "2024-01-07"
train_days = 28
data_dir = "{}"
out_dir = "{}"

[[models]]
name = "Naive"

[[models]]
name = "SeasonalNaiveDay"
{extra_models}"#,
        d.data.display(),
        d.root.join(out).display()
    );
    let path = d.root.join(format!("{out}.toml"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn desk_run_writes_all_artifacts() {
    let d = desk();
    let cfg = desk_config(&d, "out", "");
    let out = epfbench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = d.root.join("out");

    let records = lines(&dir.join("records.csv"));
    assert_eq!(records.len(), 1 + 14);
    assert_eq!(records[0].split(',').count(), 51);

    let metrics = lines(&dir.join("metrics.csv"));
    assert_eq!(metrics.len(), 1 + 2);
    assert!(metrics[1].starts_with("DE,Naive,7,1,"));

    let dm = lines(&dir.join("dm_DE.csv"));
    assert_eq!(dm[0], "model,Naive,SeasonalNaiveDay");
    assert!(dm[1].starts_with("Naive,,"));
    assert!(dm[2].ends_with(','));
    let svg = fs::read_to_string(dir.join("dm_DE.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("SeasonalNaiveDay"));

    assert_eq!(lines(&dir.join("failures.csv")).len(), 1);
    let meta = fs::read_to_string(dir.join("run_meta.toml")).unwrap();
    assert!(meta.contains("dm_variance = \"plain\""));
    assert!(meta.contains("[meta]"));
}

#[test]
fn run_meta_replays_bit_exactly() {
    let d = desk();
    let cfg = desk_config(&d, "first", "");
    assert_eq!(code(&epfbench(&["run", "--config", cfg.to_str().unwrap()])), 0);
    let first = d.root.join("first");
    let second = d.root.join("second");
    let out = epfbench(&[
        "run",
        "--config",
        first.join("run_meta.toml").to_str().unwrap(),
        "--out-dir",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["records.csv", "metrics.csv", "failures.csv", "dm_DE.csv", "dm_DE.svg"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_zone_data_fails_before_writing() {
    let d = desk();
    let out_dir = d.root.join("out");
    let out = epfbench(&[
        "run",
        "--zones",
        "DE,AT",
        "--test-start",
        "2024-01-01",
        "--test-end",
        "2024-01-07",
        "--train-days",
        "28",
        "--model",
        "Naive",
        "--data-dir",
        d.data.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("zone AT"));
    assert!(!out_dir.exists());
}

#[test]
fn insufficient_history_is_a_data_error() {
    let d = desk();
    let out = epfbench(&[
        "run",
        "--zones",
        "DE",
        "--test-start",
        "2024-01-01",
        "--test-end",
        "2024-01-07",
        "--model",
        "Naive",
        "--data-dir",
        d.data.to_str().unwrap(),
        "--out-dir",
        d.root.join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("zone DE"));
}

#[test]
fn crashing_external_model_gives_partial_exit() {
    let d = desk();
    let crash = r#"
[[models]]
name = "Crashy"
kind = "external"
command = "sh"
args = ["-c", "echo '{\"type\":\"hello\",\"name\":\"sh\",\"input_size\":168,\"horizon\":24}'; read line; exit 3"]
timeout_secs = 10
"#;
    let cfg = desk_config(&d, "out", crash);
    let out = epfbench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = d.root.join("out");
    let metrics = lines(&dir.join("metrics.csv"));
    assert_eq!(metrics.len(), 4);
    assert!(metrics[1].starts_with("DE,Naive,7,1,"));
    assert!(metrics[2].starts_with("DE,SeasonalNaiveDay,7,1,"));
    assert!(metrics[3].starts_with("DE,Crashy,0,0,"));
    let failures = lines(&dir.join("failures.csv"));
    assert_eq!(failures.len(), 1 + 7);
    assert!(failures[1].contains("exit code 3") || failures[1].contains("exited"), "{}", failures[1]);
    assert!(failures[2].contains("not attempted"));
    assert_eq!(lines(&dir.join("dm_DE.csv"))[0], "model,Naive,SeasonalNaiveDay");
}

#[test]
fn echo_child_matches_native_seasonal_naive() {
    let d = desk();
    let echo = format!(
        "\n[[models]]\nname = \"Echo\"\nkind = \"external\"\ncommand = \"{}\"\n",
        echo_forecaster().display()
    );
    let cfg = desk_config(&d, "out", &echo);
    let out = epfbench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = lines(&d.root.join("out").join("metrics.csv"));
    let tail = |row: &str| row.splitn(3, ',').nth(2).unwrap().to_string();
    let snday = metrics.iter().find(|r| r.starts_with("DE,SeasonalNaiveDay,")).unwrap();
    let echo = metrics.iter().find(|r| r.starts_with("DE,Echo,")).unwrap();
    assert_eq!(tail(snday), tail(echo));
}

#[test]
fn dm_and_report_reproduce_run_outputs() {
    let d = desk();
    let cfg = desk_config(&d, "out", "");
    assert_eq!(code(&epfbench(&["run", "--config", cfg.to_str().unwrap()])), 0);
    let dir = d.root.join("out");
    let records = dir.join("records.csv");
    let again = d.root.join("again");

    assert_eq!(
        code(&epfbench(&["dm", "--records", records.to_str().unwrap(), "--out-dir", again.to_str().unwrap()])),
        0
    );
    assert_eq!(fs::read(dir.join("dm_DE.csv")).unwrap(), fs::read(again.join("dm_DE.csv")).unwrap());
    assert_eq!(fs::read(dir.join("dm_DE.svg")).unwrap(), fs::read(again.join("dm_DE.svg")).unwrap());

    let re = d.root.join("re");
    assert_eq!(
        code(&epfbench(&["report", "--records", records.to_str().unwrap(), "--out-dir", re.to_str().unwrap()])),
        0
    );
    assert_eq!(fs::read(dir.join("metrics.csv")).unwrap(), fs::read(re.join("metrics.csv")).unwrap());
}

#[test]
fn ingest_normalizes_dst_across_files() {
    let tmp = tempfile::tempdir().unwrap();
    let first = Utc.with_ymd_and_hms(2024, 3, 29, 23, 0, 0).unwrap();
    let hours = 71; // 24 + 23 + 24 local hours
    let row = |i: i64| {
        let ts = first + Duration::hours(i);
        format!("{},{}\n", ts.format("%Y-%m-%dT%H:%M:%SZ"), 40 + i)
    };
    let mut a = String::from("timestamp,price\n");
    let mut b = String::from("timestamp,price\n");
    for i in 0..hours {
        if i < 40 {
            a.push_str(&row(i));
        }
        if i >= 30 {
            b.push_str(&row(i));
        }
    }
    let (pa, pb) = (tmp.path().join("a.csv"), tmp.path().join("b.csv"));
    fs::write(&pa, a).unwrap();
    fs::write(&pb, b).unwrap();
    let data = tmp.path().join("data");
    let out = epfbench(&[
        "ingest",
        "--zone",
        "DE",
        "--data-dir",
        data.to_str().unwrap(),
        pb.to_str().unwrap(),
        pa.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let canon = lines(&data.join("DE.csv"));
    assert_eq!(canon.len(), 1 + 72);
    assert_eq!(canon[1], "2024-03-30,0,40");
    // 2024-03-31 has no 02:00; it is filled from its neighbours
    let filled = canon.iter().find(|l| l.starts_with("2024-03-31,2,")).unwrap();
    assert_eq!(filled, "2024-03-31,2,65.5");
    assert_eq!(canon[72], "2024-04-01,23,110");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&epfbench(&["run", "--train-days", "many"])), 1);
    assert_eq!(code(&epfbench(&["frobnicate"])), 1);
    assert_eq!(code(&epfbench(&["--help"])), 0);
    let out = epfbench(&["run", "--zones", "DE"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("test_start"));
}
