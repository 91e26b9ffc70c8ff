//! Deterministic stand-in for an external environment, speaking the bridge
//! protocol on stdio. 8 observations, 4 actions, episodes end after 5 steps.
//!
//! `--mode` selects a failure to exercise: `invalid-json` (garbled reply to
//! reset), `hang` (never answers spec), `short-obs` (7-value observations),
//! `step-error` (error reply to every step), `crash` (dies on spec).

use std::io::{self, BufRead, Write};

use serde_json::Value;

const OBS_DIM: usize = 8;
const N_ACTIONS: usize = 4;
const EPISODE_LEN: u32 = 5;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Normal,
    InvalidJson,
    Hang,
    ShortObs,
    StepError,
    Crash,
}

fn parse_mode() -> Mode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = match args.iter().position(|a| a == "--mode") {
        Some(i) => args.get(i + 1).map(String::as_str).unwrap_or(""),
        None => "normal",
    };
    match name {
        "normal" => Mode::Normal,
        "invalid-json" => Mode::InvalidJson,
        "hang" => Mode::Hang,
        "short-obs" => Mode::ShortObs,
        "step-error" => Mode::StepError,
        "crash" => Mode::Crash,
        other => {
            eprintln!("unknown mode {other:?}");
            std::process::exit(2);
        }
    }
}

struct Stub {
    mode: Mode,
    obs: Vec<f64>,
    t: u32,
}

impl Stub {
    fn obs_line(&self) -> String {
        let len = if self.mode == Mode::ShortObs {
            OBS_DIM - 1
        } else {
            OBS_DIM
        };
        serde_json::to_string(&self.obs[..len]).expect("finite floats")
    }

    fn handle(&mut self, request: &Value) -> Option<String> {
        let cmd = request.get("cmd").and_then(Value::as_str).unwrap_or("");
        Some(match cmd {
            "spec" => match self.mode {
                Mode::Hang => loop {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                },
                Mode::Crash => {
                    eprintln!("stub: simulated crash while building the environment");
                    std::process::exit(3);
                }
                _ => format!("{{\"obs_dim\":{OBS_DIM},\"n_actions\":{N_ACTIONS}}}"),
            },
            "reset" => {
                let Some(seed) = request.get("seed").and_then(Value::as_u64) else {
                    return Some(r#"{"error":"reset needs an integer seed"}"#.into());
                };
                self.t = 0;
                self.obs = (0..OBS_DIM as u64)
                    .map(|i| ((seed + i) % 5) as f64 * 0.25 - 0.5)
                    .collect();
                if self.mode == Mode::InvalidJson {
                    return Some(r#"{"obs":[0.0,"#.into());
                }
                format!("{{\"obs\":{}}}", self.obs_line())
            }
            "step" => {
                if self.mode == Mode::StepError {
                    return Some(r#"{"error":"simulated step failure"}"#.into());
                }
                let action = match request.get("action").and_then(Value::as_u64) {
                    Some(a) if (a as usize) < N_ACTIONS => a as usize,
                    _ => return Some(r#"{"error":"action must be an integer in [0, 4)"}"#.into()),
                };
                self.t += 1;
                let push = (action as f64 - 1.5) * 0.125;
                self.obs[2 * action] += push;
                self.obs[2 * action + 1] -= push;
                let reward = if action as u32 == self.t % N_ACTIONS as u32 {
                    1.0
                } else {
                    -0.5
                };
                let terminated = self.t >= EPISODE_LEN;
                format!(
                    "{{\"obs\":{},\"reward\":{},\"terminated\":{terminated},\"truncated\":false}}",
                    self.obs_line(),
                    serde_json::to_string(&reward).expect("finite")
                )
            }
            "close" => {
                println!(r#"{{"ok":true}}"#);
                return None;
            }
            other => format!(
                "{{\"error\":{}}}",
                Value::String(format!("unknown command {other:?}"))
            ),
        })
    }
}

fn main() {
    let mut stub = Stub {
        mode: parse_mode(),
        obs: vec![0.0; OBS_DIM],
        t: 0,
    };
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let reply = match serde_json::from_str::<Value>(&line) {
            Ok(request) => match stub.handle(&request) {
                Some(reply) => reply,
                None => break,
            },
            Err(e) => format!(
                "{{\"error\":{}}}",
                Value::String(format!("bad request: {e}"))
            ),
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
}
