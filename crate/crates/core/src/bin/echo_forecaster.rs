//! Conformance fixture for the external forecaster protocol: answers every
//! request with the last 24 context values.
//!
//! `--mode` selects a misbehaviour for error-path tests: `short` (23
//! values), `sleep` (never answers), `crash-after=N` (exit 3 on request N),
//! `bad-hello`, `wrong-id`, `error` (error record for every request).

use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

fn main() {
    let mode = std::env::args()
        .skip_while(|a| a != "--mode")
        .nth(1)
        .unwrap_or_else(|| "echo".into());
    let crash_after: Option<u64> = mode.strip_prefix("crash-after=").and_then(|n| n.parse().ok());

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let hello = if mode == "bad-hello" {
        json!({"type": "greeting"})
    } else {
        json!({"type": "hello", "name": "echo", "input_size": 168, "horizon": 24})
    };
    writeln!(out, "{hello}").unwrap();
    out.flush().unwrap();

    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        let msg: Value = serde_json::from_str(&line).expect("valid request");
        match msg["type"].as_str() {
            Some("shutdown") => return,
            Some("forecast") => {
                let id = msg["request_id"].as_u64().unwrap();
                if crash_after == Some(id) {
                    std::process::exit(3);
                }
                let ctx: Vec<f64> = serde_json::from_value(msg["context"].clone()).unwrap();
                let keep = if mode == "short" { 23 } else { 24 };
                let reply = match mode.as_str() {
                    "sleep" => loop {
                        std::thread::sleep(std::time::Duration::from_secs(3600));
                    },
                    "error" => json!({"type": "error", "request_id": id, "message": "model failure"}),
                    "wrong-id" => json!({"type": "forecast_result", "request_id": id + 1, "forecast": &ctx[ctx.len() - 24..]}),
                    _ => json!({"type": "forecast_result", "request_id": id, "forecast": &ctx[ctx.len() - keep..]}),
                };
                writeln!(out, "{reply}").unwrap();
                out.flush().unwrap();
            }
            _ => std::process::exit(2),
        }
    }
}
