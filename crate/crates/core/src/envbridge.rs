//! Environments living in another process, spoken to over newline-delimited
//! JSON on the child's stdin/stdout. One request in flight at a time.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::error::Result;
use crate::rl::env::{EnvError, Environment, Step};

const STDERR_TAIL_LINES: usize = 20;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("failed to launch bridge command {command:?}: {source}")]
    Spawn {
        command: Vec<String>,
        source: std::io::Error,
    },
    #[error("bridge did not answer within {timeout_ms} ms; process killed{}", tail(.stderr))]
    Timeout { timeout_ms: u64, stderr: String },
    #[error("bridge response line {line} is not valid JSON ({message}){}", tail(.stderr))]
    InvalidJson {
        line: usize,
        message: String,
        stderr: String,
    },
    #[error("bridge response line {line} is malformed: {message}")]
    Malformed { line: usize, message: String },
    #[error("protocol order violation: {0}")]
    ProtocolOrder(String),
    #[error("observation has {got} values, bridge declared obs_dim {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bridge reported an error: {0}")]
    Remote(String),
    #[error("bridge closed its output{}", tail(.stderr))]
    Disconnected { stderr: String },
    #[error("bridge i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

fn tail(stderr: &str) -> String {
    if stderr.is_empty() {
        String::new()
    } else {
        format!("; stderr tail:\n{stderr}")
    }
}

/// A request line. Field order is part of the wire format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "cmd", rename_all = "lowercase")]
pub enum Request {
    Spec,
    Reset { seed: u64 },
    Step { action: usize },
    Close,
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests always serialize")
    }
}

/// Which side sent a transcript line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

/// Every line exchanged, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<(Direction, String)>,
}

impl Transcript {
    /// `> request` / `< response`, one per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (dir, line) in &self.lines {
            out.push_str(match dir {
                Direction::Sent => "> ",
                Direction::Received => "< ",
            });
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    NeedsReset,
    Running,
    Closed,
}

pub struct BridgeEnv {
    child: Child,
    stdin: ChildStdin,
    responses: Receiver<std::io::Result<String>>,
    stderr: Arc<Mutex<VecDeque<String>>>,
    timeout: Duration,
    obs_dim: usize,
    n_actions: usize,
    lines_read: usize,
    phase: Phase,
    transcript: Option<Transcript>,
}

impl BridgeEnv {
    /// Launches `command`, asks for its spec and validates it.
    pub fn spawn(command: &[String], timeout_ms: u64) -> std::result::Result<Self, BridgeError> {
        Self::launch(command, timeout_ms, false)
    }

    /// Like [`BridgeEnv::spawn`] but records every exchanged line.
    pub fn spawn_recording(
        command: &[String],
        timeout_ms: u64,
    ) -> std::result::Result<Self, BridgeError> {
        Self::launch(command, timeout_ms, true)
    }

    fn launch(
        command: &[String],
        timeout_ms: u64,
        record: bool,
    ) -> std::result::Result<Self, BridgeError> {
        let spawn_err = |source| BridgeError::Spawn {
            command: command.to_vec(),
            source,
        };
        let (program, args) = command.split_first().ok_or_else(|| {
            spawn_err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "empty command",
            ))
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(spawn_err)?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let stderr_pipe = child.stderr.take().expect("piped stderr");

        let (tx, responses) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(VecDeque::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            for line in BufReader::new(stderr_pipe).lines().map_while(|l| l.ok()) {
                let mut buf = sink.lock().expect("stderr buffer");
                if buf.len() == STDERR_TAIL_LINES {
                    buf.pop_front();
                }
                buf.push_back(line);
            }
        });

        let mut env = Self {
            child,
            stdin,
            responses,
            stderr,
            timeout: Duration::from_millis(timeout_ms),
            obs_dim: 0,
            n_actions: 0,
            lines_read: 0,
            phase: Phase::NeedsReset,
            transcript: record.then(Transcript::default),
        };
        let spec = env.exchange(&Request::Spec)?;
        env.obs_dim = env.positive_field(&spec, "obs_dim")?;
        env.n_actions = env.positive_field(&spec, "n_actions")?;
        Ok(env)
    }

    pub fn transcript(&self) -> Option<&Transcript> {
        self.transcript.as_ref()
    }

    /// Last lines the child wrote to stderr.
    pub fn stderr_tail(&self) -> String {
        let buf = self.stderr.lock().expect("stderr buffer");
        buf.iter().cloned().collect::<Vec<_>>().join("\n")
    }

    /// Sends `close`, waits for the acknowledgement and reaps the child.
    pub fn close(&mut self) -> std::result::Result<(), BridgeError> {
        self.ensure_open()?;
        let reply = self.exchange(&Request::Close)?;
        self.phase = Phase::Closed;
        if reply.get("ok") != Some(&Value::Bool(true)) {
            return Err(self.malformed("close reply lacks \"ok\":true"));
        }
        self.child.wait()?;
        Ok(())
    }

    fn ensure_open(&self) -> std::result::Result<(), BridgeError> {
        if self.phase == Phase::Closed {
            return Err(BridgeError::ProtocolOrder(
                "the bridge is already closed".into(),
            ));
        }
        Ok(())
    }

    fn malformed(&self, message: impl Into<String>) -> BridgeError {
        BridgeError::Malformed {
            line: self.lines_read,
            message: message.into(),
        }
    }

    fn kill(&mut self) {
        self.phase = Phase::Closed;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// One request, one response line, parsed. `{"error":…}` becomes an error.
    fn exchange(&mut self, request: &Request) -> std::result::Result<Value, BridgeError> {
        let line = request.to_line();
        if let Some(t) = self.transcript.as_mut() {
            t.lines.push((Direction::Sent, line.clone()));
        }
        let written = writeln!(self.stdin, "{line}").and_then(|_| self.stdin.flush());
        if written.is_err() {
            thread::sleep(Duration::from_millis(50));
            self.kill();
            return Err(BridgeError::Disconnected {
                stderr: self.stderr_tail(),
            });
        }
        let reply = match self.responses.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => {
                self.kill();
                return Err(BridgeError::Io(e));
            }
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(BridgeError::Timeout {
                    timeout_ms: self.timeout.as_millis() as u64,
                    stderr: self.stderr_tail(),
                });
            }
            Err(RecvTimeoutError::Disconnected) => {
                // Give the stderr reader a moment to drain.
                let _ = self.child.wait();
                thread::sleep(Duration::from_millis(20));
                self.phase = Phase::Closed;
                return Err(BridgeError::Disconnected {
                    stderr: self.stderr_tail(),
                });
            }
        };
        self.lines_read += 1;
        if let Some(t) = self.transcript.as_mut() {
            t.lines.push((Direction::Received, reply.clone()));
        }
        let value: Value = serde_json::from_str(&reply).map_err(|e| BridgeError::InvalidJson {
            line: self.lines_read,
            message: e.to_string(),
            stderr: self.stderr_tail(),
        })?;
        if !value.is_object() {
            return Err(self.malformed("expected a JSON object"));
        }
        if let Some(err) = value.get("error") {
            let msg = err
                .as_str()
                .map(str::to_owned)
                .unwrap_or_else(|| err.to_string());
            return Err(BridgeError::Remote(msg));
        }
        Ok(value)
    }

    fn positive_field(&self, value: &Value, key: &str) -> std::result::Result<usize, BridgeError> {
        match value.get(key).and_then(Value::as_u64) {
            Some(n) if n > 0 => Ok(n as usize),
            _ => Err(self.malformed(format!("\"{key}\" must be a positive integer"))),
        }
    }

    fn observation(&self, value: &Value) -> std::result::Result<Vec<f64>, BridgeError> {
        let items = value
            .get("obs")
            .and_then(Value::as_array)
            .ok_or_else(|| self.malformed("missing \"obs\" array"))?;
        let obs = items
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| self.malformed("\"obs\" holds a non-number"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if obs.len() != self.obs_dim {
            return Err(BridgeError::LengthMismatch {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        Ok(obs)
    }

    fn bool_field(&self, value: &Value, key: &str) -> std::result::Result<bool, BridgeError> {
        value
            .get(key)
            .and_then(Value::as_bool)
            .ok_or_else(|| self.malformed(format!("missing boolean \"{key}\"")))
    }

    pub fn bridge_reset(&mut self, seed: u64) -> std::result::Result<Vec<f64>, BridgeError> {
        self.ensure_open()?;
        let reply = self.exchange(&Request::Reset { seed })?;
        let obs = self.observation(&reply)?;
        self.phase = Phase::Running;
        Ok(obs)
    }

    pub fn bridge_step(&mut self, action: usize) -> std::result::Result<Step, BridgeError> {
        match self.phase {
            Phase::Closed => {
                return Err(BridgeError::ProtocolOrder(
                    "the bridge is already closed".into(),
                ))
            }
            Phase::NeedsReset => {
                return Err(BridgeError::ProtocolOrder(
                    "step sent before reset or after the episode ended".into(),
                ))
            }
            Phase::Running => {}
        }
        let reply = self.exchange(&Request::Step { action })?;
        let observation = self.observation(&reply)?;
        let reward = reply
            .get("reward")
            .and_then(Value::as_f64)
            .ok_or_else(|| self.malformed("missing numeric \"reward\""))?;
        let terminated = self.bool_field(&reply, "terminated")?;
        let truncated = self.bool_field(&reply, "truncated")?;
        if terminated || truncated {
            self.phase = Phase::NeedsReset;
        }
        Ok(Step {
            observation,
            reward,
            terminated,
            truncated,
        })
    }
}

impl Environment for BridgeEnv {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        Ok(self.bridge_reset(seed)?)
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        if action >= self.n_actions {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: self.n_actions,
            }
            .into());
        }
        Ok(self.bridge_step(action)?)
    }
}

impl Drop for BridgeEnv {
    fn drop(&mut self) {
        if self.phase != Phase::Closed && self.close().is_err() {
            self.kill();
        }
    }
}
