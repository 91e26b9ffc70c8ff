use std::time::{Duration, Instant};

use qrlnas_core::envbridge::{BridgeEnv, BridgeError, Direction, Request};
use qrlnas_core::rl::Environment;
use qrlnas_core::Error;

/// A bridge written as a shell script: each `reply` answers one request.
fn script(body: &str) -> Vec<String> {
    let prelude = "reply() { read -r _req; printf '%s\\n' \"$1\"; }; ";
    vec!["sh".into(), "-c".into(), format!("{prelude}{body}")]
}

const SPEC: &str = r#"reply '{"obs_dim":2,"n_actions":3}'; "#;

#[test]
fn request_framing_is_exact() {
    assert_eq!(Request::Spec.to_line(), r#"{"cmd":"spec"}"#);
    assert_eq!(
        Request::Reset { seed: 7 }.to_line(),
        r#"{"cmd":"reset","seed":7}"#
    );
    assert_eq!(
        Request::Step { action: 2 }.to_line(),
        r#"{"cmd":"step","action":2}"#
    );
    assert_eq!(Request::Close.to_line(), r#"{"cmd":"close"}"#);
}

#[test]
fn episode_round_trip_and_transcript() {
    let body = format!(
        r#"{SPEC}reply '{{"obs":[0.5,-1]}}'; reply '{{"obs":[1,2],"reward":0.25,"terminated":true,"truncated":false}}'; reply '{{"ok":true}}'"#
    );
    let mut env = BridgeEnv::spawn_recording(&script(&body), 5_000).unwrap();
    assert_eq!((env.obs_dim(), env.n_actions()), (2, 3));
    assert_eq!(env.reset(0).unwrap(), vec![0.5, -1.0]);
    let step = env.step(2).unwrap();
    assert_eq!(
        (step.reward, step.terminated, step.truncated),
        (0.25, true, false)
    );
    assert!(matches!(
        env.step(0),
        Err(Error::Bridge(BridgeError::ProtocolOrder(_)))
    ));
    env.close().unwrap();
    let t = env.transcript().unwrap();
    assert_eq!(t.lines.len(), 8);
    assert_eq!(
        t.lines[2],
        (Direction::Sent, r#"{"cmd":"reset","seed":0}"#.to_string())
    );
    assert!(t
        .render()
        .starts_with("> {\"cmd\":\"spec\"}\n< {\"obs_dim\":2,\"n_actions\":3}\n"));
    assert!(matches!(
        env.reset(0),
        Err(Error::Bridge(BridgeError::ProtocolOrder(_)))
    ));
}

#[test]
fn invalid_json_names_the_line() {
    let body = format!("{SPEC}reply 'not json'");
    let mut env = BridgeEnv::spawn(&script(&body), 5_000).unwrap();
    match env.reset(1) {
        Err(Error::Bridge(BridgeError::InvalidJson { line, .. })) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn spec_must_be_positive() {
    let err = BridgeEnv::spawn(&script(r#"reply '{"obs_dim":0,"n_actions":3}'"#), 5_000).err();
    assert!(
        matches!(err, Some(BridgeError::Malformed { line: 1, .. })),
        "{err:?}"
    );
}

#[test]
fn length_mismatch_and_remote_errors() {
    let body = format!(r#"{SPEC}reply '{{"obs":[1,2,3]}}'"#);
    let mut env = BridgeEnv::spawn(&script(&body), 5_000).unwrap();
    assert!(matches!(
        env.bridge_reset(0),
        Err(BridgeError::LengthMismatch {
            expected: 2,
            got: 3
        })
    ));
    let body = format!(r#"{SPEC}reply '{{"error":"no such env"}}'"#);
    let mut env = BridgeEnv::spawn(&script(&body), 5_000).unwrap();
    match env.bridge_reset(0) {
        Err(BridgeError::Remote(msg)) => assert_eq!(msg, "no such env"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn timeout_kills_the_process() {
    let started = Instant::now();
    let err = BridgeEnv::spawn(&script("echo waiting >&2; sleep 30"), 300).err();
    assert!(
        matches!(
            err,
            Some(BridgeError::Timeout {
                timeout_ms: 300,
                ..
            })
        ),
        "{err:?}"
    );
    assert!(started.elapsed() < Duration::from_secs(10));
}

#[test]
fn exit_reports_stderr_tail() {
    let err = BridgeEnv::spawn(&script("echo 'gym not installed' >&2; exit 1"), 5_000).err();
    match err {
        Some(BridgeError::Disconnected { stderr }) => assert!(stderr.contains("gym not installed")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn spawn_failures() {
    assert!(matches!(
        BridgeEnv::spawn(&[], 100),
        Err(BridgeError::Spawn { .. })
    ));
    assert!(matches!(
        BridgeEnv::spawn(&["/nonexistent/bridge-binary".into()], 100),
        Err(BridgeError::Spawn { .. })
    ));
}

#[test]
fn invalid_action_is_caught_locally() {
    let body = format!(r#"{SPEC}reply '{{"obs":[0,0]}}'"#);
    let mut env = BridgeEnv::spawn(&script(&body), 5_000).unwrap();
    env.reset(0).unwrap();
    assert!(matches!(env.step(3), Err(Error::Env(_))));
}
