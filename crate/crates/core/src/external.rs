//! Drives an external forecaster process over newline-delimited JSON on its
//! stdin/stdout. The child's stderr is passed through.
//!
//! The child announces itself with a `hello` record, then answers each
//! `forecast` request with a `forecast_result` before the next request is
//! sent. A `shutdown` record ends the session.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::HOURS_PER_DAY;
use crate::forecaster::DayForecast;

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("cannot start {command}: {source}")]
    SpawnFailed {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("handshake failed: {0}")]
    HandshakeFailed(String),
    #[error("protocol error on request {request_id}: {detail}")]
    ProtocolError { request_id: u64, detail: String },
    #[error("child reported an error for request {request_id}: {message}")]
    ChildReported { request_id: u64, message: String },
    #[error("no response to request {request_id} within {timeout:?}; child killed")]
    Timeout { request_id: u64, timeout: Duration },
    #[error("child exited prematurely ({})", exit_code.map_or("killed by signal".to_string(), |c| format!("exit code {c}")))]
    ChildCrashed { exit_code: Option<i32> },
}

impl AdapterError {
    /// Whether the child can no longer be used for further requests.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, AdapterError::ChildReported { .. })
    }
}

/// How to launch an external forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub name: String,
    pub command: String,
    pub args: Vec<String>,
    /// Limit for the handshake and for each response.
    pub timeout: Duration,
    pub input_size: usize,
}

impl ExternalSpec {
    pub fn new(name: impl Into<String>, command: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            command: command.into(),
            args: Vec::new(),
            timeout: Duration::from_secs(60),
            input_size: 168,
        }
    }

    pub fn spawn(&self) -> Result<ExternalForecaster, AdapterError> {
        ExternalForecaster::spawn(self)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Hello {
    pub name: String,
    pub input_size: usize,
    pub horizon: usize,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Outgoing<'a> {
    Forecast {
        request_id: u64,
        zone: &'a str,
        context: &'a [f64],
        context_end: String,
    },
    Shutdown,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Incoming {
    Hello(Hello),
    ForecastResult {
        request_id: u64,
        forecast: Vec<f64>,
    },
    Error {
        request_id: Option<u64>,
        message: String,
    },
}

pub fn format_context_end(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H").to_string()
}

/// A running child process speaking the forecast protocol.
pub struct ExternalForecaster {
    spec: ExternalSpec,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    hello: Hello,
    next_id: u64,
    broken: bool,
}

impl ExternalForecaster {
    pub fn spawn(spec: &ExternalSpec) -> Result<Self, AdapterError> {
        let mut child = Command::new(&spec.command)
            .args(&spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| AdapterError::SpawnFailed {
                command: spec.command.clone(),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut this = Self {
            spec: spec.clone(),
            child,
            stdin,
            lines: rx,
            hello: Hello {
                name: String::new(),
                input_size: 0,
                horizon: 0,
            },
            next_id: 0,
            broken: false,
        };
        this.hello = this.handshake()?;
        Ok(this)
    }

    fn handshake(&mut self) -> Result<Hello, AdapterError> {
        let line = match self.lines.recv_timeout(self.spec.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(self.fail(AdapterError::HandshakeFailed(e.to_string()))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(self.fail(AdapterError::HandshakeFailed(format!(
                    "no hello within {:?}",
                    self.spec.timeout
                ))))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let code = self.reap();
                return Err(AdapterError::HandshakeFailed(format!(
                    "child exited before hello ({})",
                    code.map_or("no exit code".into(), |c| format!("exit code {c}"))
                )));
            }
        };
        let hello = match serde_json::from_str::<Incoming>(&line) {
            Ok(Incoming::Hello(h)) => h,
            _ => {
                return Err(self.fail(AdapterError::HandshakeFailed(format!(
                    "expected hello record, got {line:?}"
                ))))
            }
        };
        if hello.horizon != HOURS_PER_DAY || hello.input_size != self.spec.input_size {
            return Err(self.fail(AdapterError::HandshakeFailed(format!(
                "child offers input_size {} / horizon {}, need {} / {HOURS_PER_DAY}",
                hello.input_size, hello.horizon, self.spec.input_size
            ))));
        }
        Ok(hello)
    }

    pub fn hello(&self) -> &Hello {
        &self.hello
    }

    pub fn spec(&self) -> &ExternalSpec {
        &self.spec
    }

    pub fn is_running(&mut self) -> bool {
        matches!(self.child.try_wait(), Ok(None))
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    /// Sends one request and waits for its answer.
    pub fn forecast(
        &mut self,
        zone: &str,
        context: &[f64],
        context_end: NaiveDateTime,
    ) -> Result<DayForecast, AdapterError> {
        self.next_id += 1;
        let request_id = self.next_id;
        if self.broken {
            return Err(AdapterError::ProtocolError {
                request_id,
                detail: "child is no longer usable after an earlier failure".into(),
            });
        }
        if context.len() != self.spec.input_size {
            return Err(AdapterError::ProtocolError {
                request_id,
                detail: format!(
                    "context has {} values, configured input size is {}",
                    context.len(),
                    self.spec.input_size
                ),
            });
        }
        let request = Outgoing::Forecast {
            request_id,
            zone,
            context,
            context_end: format_context_end(context_end),
        };
        if self.send(&request).is_err() {
            let code = self.reap();
            return Err(self.fail(AdapterError::ChildCrashed { exit_code: code }));
        }

        let deadline = Instant::now() + self.spec.timeout;
        let line = match self.lines.recv_timeout(deadline.saturating_duration_since(Instant::now())) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                return Err(self.fail(AdapterError::ProtocolError {
                    request_id,
                    detail: e.to_string(),
                }))
            }
            Err(RecvTimeoutError::Timeout) => {
                return Err(self.fail(AdapterError::Timeout {
                    request_id,
                    timeout: self.spec.timeout,
                }))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let code = self.reap();
                return Err(self.fail(AdapterError::ChildCrashed { exit_code: code }));
            }
        };
        self.parse_response(request_id, &line)
    }

    fn parse_response(&mut self, request_id: u64, line: &str) -> Result<DayForecast, AdapterError> {
        let protocol = |detail: String| AdapterError::ProtocolError { request_id, detail };
        let message = match serde_json::from_str::<Incoming>(line) {
            Ok(m) => m,
            Err(e) => return Err(self.fail(protocol(format!("unparseable line {line:?}: {e}")))),
        };
        match message {
            Incoming::ForecastResult {
                request_id: got,
                forecast,
            } => {
                if got != request_id {
                    return Err(self.fail(protocol(format!("response carries request_id {got}"))));
                }
                if forecast.len() != HOURS_PER_DAY {
                    return Err(self.fail(protocol(format!(
                        "forecast has {} values, expected {HOURS_PER_DAY}",
                        forecast.len()
                    ))));
                }
                if forecast.iter().any(|v| !v.is_finite()) {
                    return Err(self.fail(protocol("non-finite forecast value".into())));
                }
                let mut out = [0.0; HOURS_PER_DAY];
                out.copy_from_slice(&forecast);
                Ok(out)
            }
            Incoming::Error {
                request_id: Some(got),
                message,
            } if got == request_id => Err(AdapterError::ChildReported {
                request_id,
                message,
            }),
            Incoming::Error { message, .. } => {
                Err(self.fail(protocol(format!("error record for another request: {message}"))))
            }
            Incoming::Hello(_) => Err(self.fail(protocol("unexpected hello record".into()))),
        }
    }

    fn send(&mut self, message: &Outgoing<'_>) -> std::io::Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::BrokenPipe, "stdin closed"))?;
        let mut line = serde_json::to_vec(message).map_err(std::io::Error::other)?;
        line.push(b'\n');
        stdin.write_all(&line)?;
        stdin.flush()
    }

    /// Marks the child unusable and kills it.
    fn fail(&mut self, err: AdapterError) -> AdapterError {
        self.broken = true;
        self.kill();
        err
    }

    fn kill(&mut self) {
        if matches!(self.child.try_wait(), Ok(None)) {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }

    fn reap(&mut self) -> Option<i32> {
        self.stdin.take();
        self.child.wait().ok().and_then(|s| s.code())
    }

    /// Sends `shutdown` and waits up to the timeout for the child to exit,
    /// killing it otherwise.
    pub fn shutdown(mut self) -> Option<ExitStatus> {
        if !self.broken {
            let _ = self.send(&Outgoing::Shutdown);
        }
        self.stdin.take();
        let deadline = Instant::now() + self.spec.timeout;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return Some(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    self.kill();
                    return self.child.try_wait().ok().flatten();
                }
            }
        }
    }
}

impl Drop for ExternalForecaster {
    fn drop(&mut self) {
        self.stdin.take();
        self.kill();
    }
}
