//! Protocol self-test against the bundled stub.

use std::path::Path;

use qrlnas_core::envbridge::{BridgeEnv, BridgeError, Transcript};

/// Transcript of the scripted session, as recorded against the stub.
pub const GOLDEN_TRANSCRIPT: &str = include_str!("../golden/bridge_transcript.txt");

const ERROR_MODE_TIMEOUT_MS: u64 = 400;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

fn command(stub: &Path, mode: &str) -> Vec<String> {
    vec![stub.display().to_string(), "--mode".into(), mode.into()]
}

/// Spec, one full episode, a rejected out-of-order step, a repeat reset and
/// close. Returns the recorded transcript and the in-session checks.
pub fn scripted_session(
    stub: &Path,
    timeout_ms: u64,
) -> Result<(Transcript, Vec<Check>), BridgeError> {
    let mut checks = Vec::new();
    let mut env = BridgeEnv::spawn_recording(&command(stub, "normal"), timeout_ms)?;
    use qrlnas_core::rl::Environment;
    checks.push(Check::new(
        "spec dimensions",
        env.obs_dim() == 8 && env.n_actions() == 4,
        format!("obs_dim {} n_actions {}", env.obs_dim(), env.n_actions()),
    ));

    let first = env.bridge_reset(0)?;
    let mut steps = 0;
    for action in [1, 2, 3, 0, 1, 2, 3, 0] {
        steps += 1;
        if env.bridge_step(action)?.done() {
            break;
        }
    }
    checks.push(Check::new(
        "episode terminates",
        steps == 5,
        format!("{steps} steps"),
    ));

    let late = env.bridge_step(1);
    checks.push(Check::new(
        "step after termination rejected",
        matches!(late, Err(BridgeError::ProtocolOrder(_))),
        format!("{late:?}"),
    ));

    let again = env.bridge_reset(0)?;
    checks.push(Check::new(
        "reset is deterministic",
        first == again,
        format!("{first:?} vs {again:?}"),
    ));
    env.bridge_step(2)?;
    env.close()?;
    let transcript = env.transcript().cloned().unwrap_or_default();
    Ok((transcript, checks))
}

fn expect(
    name: &'static str,
    outcome: Result<(), BridgeError>,
    ok: impl Fn(&BridgeError) -> bool,
) -> Check {
    match outcome {
        Err(e) if ok(&e) => Check::new(name, true, e.to_string()),
        Err(e) => Check::new(name, false, format!("unexpected error: {e}")),
        Ok(()) => Check::new(name, false, "no error raised"),
    }
}

/// Every check, golden comparison first.
pub fn bridge_check(stub: &Path, golden: &str) -> Vec<Check> {
    let mut checks = Vec::new();
    match scripted_session(stub, 10_000) {
        Ok((transcript, session)) => {
            let rendered = transcript.render();
            checks.push(Check::new(
                "golden transcript",
                rendered == golden,
                if rendered == golden {
                    format!("{} lines match", transcript.lines.len())
                } else {
                    format!("transcript differs:\n{rendered}")
                },
            ));
            checks.extend(session);
        }
        Err(e) => checks.push(Check::new("golden transcript", false, e.to_string())),
    }

    let t = ERROR_MODE_TIMEOUT_MS;
    checks.push(expect(
        "step before reset rejected",
        BridgeEnv::spawn(&command(stub, "normal"), 10_000)
            .and_then(|mut env| env.bridge_step(0).map(drop)),
        |e| matches!(e, BridgeError::ProtocolOrder(_)),
    ));
    checks.push(expect(
        "invalid JSON names its line",
        BridgeEnv::spawn(&command(stub, "invalid-json"), 10_000)
            .and_then(|mut env| env.bridge_reset(0).map(drop)),
        |e| matches!(e, BridgeError::InvalidJson { line: 2, .. }),
    ));
    checks.push(expect(
        "observation length checked",
        BridgeEnv::spawn(&command(stub, "short-obs"), 10_000)
            .and_then(|mut env| env.bridge_reset(0).map(drop)),
        |e| {
            matches!(
                e,
                BridgeError::LengthMismatch {
                    expected: 8,
                    got: 7
                }
            )
        },
    ));
    checks.push(expect(
        "error reply surfaced",
        BridgeEnv::spawn(&command(stub, "step-error"), 10_000).and_then(|mut env| {
            env.bridge_reset(0)?;
            env.bridge_step(0).map(drop)
        }),
        |e| matches!(e, BridgeError::Remote(_)),
    ));
    checks.push(expect(
        "unresponsive process times out",
        BridgeEnv::spawn(&command(stub, "hang"), t).map(drop),
        |e| matches!(e, BridgeError::Timeout { .. }),
    ));
    checks.push(expect(
        "crash reports stderr",
        BridgeEnv::spawn(&command(stub, "crash"), 10_000).map(drop),
        |e| matches!(e, BridgeError::Disconnected { stderr } if stderr.contains("simulated crash")),
    ));
    checks
}
