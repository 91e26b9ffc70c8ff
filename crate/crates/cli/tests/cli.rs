use std::path::{Path, PathBuf};
use std::process::Command;

use qrlnas_cli::bridge_check::{bridge_check, scripted_session, GOLDEN_TRANSCRIPT};
use qrlnas_cli::plot::{moving_average, plot_rewards};
use qrlnas_cli::{Algo, Checkpoint, EnvSpec, Overrides, RunConfig};
use qrlnas_core::envbridge::BridgeEnv;
use qrlnas_core::rl::conformance::check_environment;
use qrlnas_core::rl::{EpisodeRecord, RewardLog};

const QRLNAS: &str = env!("CARGO_BIN_EXE_qrlnas");
const STUB: &str = env!("CARGO_BIN_EXE_qrlnas-bridge-stub");

fn qrlnas(args: &[&str]) -> std::process::Output {
    Command::new(QRLNAS)
        .args(args)
        .env_remove("QRLNAS_SEED")
        .output()
        .unwrap()
}

fn write_log(path: &Path, rewards: &[f64]) {
    let mut log = RewardLog::new();
    for (i, r) in rewards.iter().enumerate() {
        log.push(EpisodeRecord {
            episode: i,
            steps: 1,
            total_reward: *r,
            epsilon: 0.0,
            ms: 0.0,
        });
    }
    log.write_csv(path).unwrap();
}

#[test]
fn empty_config_has_the_documented_defaults() {
    let c = RunConfig::from_toml("").unwrap();
    assert_eq!(c.lr, 0.1);
    assert_eq!(c.gamma, 0.99);
    assert_eq!(c.buffer_capacity, 100_000);
    assert_eq!(c.batch_size, 64);
    assert_eq!(c.n_qubits, 4);
    assert_eq!(c.algo, Algo::QrlDqn);
    c.validate().unwrap();
}

#[test]
fn toml_fields_and_precedence() {
    let mut c = RunConfig::from_toml(
        "algo = \"qrl-nas\"\nenv = \"cartpole\"\nseed = 3\nlr = 0.05\n[epsilon]\ndecay_steps = 500\n[search]\npopulation = 4\n",
    )
    .unwrap();
    assert_eq!(c.epsilon.decay_steps, 500);
    assert_eq!(c.epsilon.start, 1.0);
    assert_eq!(c.search.population, 4);
    assert_eq!(c.search.generations, 10);
    c.apply(Some("11"), &Overrides::default()).unwrap();
    assert_eq!(c.seed, 11);
    c.apply(
        Some("11"),
        &Overrides {
            seed: Some(12),
            lr: Some(0.2),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!((c.seed, c.lr), (12, 0.2));
    assert!(c.apply(Some("x"), &Overrides::default()).is_err());
    assert!(RunConfig::from_toml("bogus = 1").is_err());
    assert!(RunConfig::from_toml("algo = \"qrl-a3c\"").is_err());
}

#[test]
fn env_spec_parsing() {
    assert_eq!(EnvSpec::parse("gridworld").unwrap(), EnvSpec::GridWorld);
    assert_eq!(
        EnvSpec::parse("bridge:python3 adapter.py --env LunarLander-v2").unwrap(),
        EnvSpec::Bridge(vec![
            "python3".into(),
            "adapter.py".into(),
            "--env".into(),
            "LunarLander-v2".into()
        ])
    );
    assert!(EnvSpec::parse("bridge:").is_err());
    assert!(EnvSpec::parse("pong").is_err());
}

#[test]
fn validation_rejects_bad_numbers() {
    for toml in [
        "lr = -0.1",
        "gamma = 1.5",
        "batch_size = 0",
        "episodes = 0",
        "batch_size = 10\nbuffer_capacity = 5",
    ] {
        assert!(
            RunConfig::from_toml(toml).unwrap().validate().is_err(),
            "{toml}"
        );
    }
}

#[test]
fn dqn_run_artifacts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = qrlnas(&[
            "run",
            "--episodes",
            "10",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(
            String::from_utf8_lossy(&o.stdout).contains("mean reward over last 10 of 10 episodes")
        );
    }
    let csv = std::fs::read_to_string(a.join("rewards.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    for f in [
        "rewards.csv",
        "checkpoint.json",
        "config_echo.json",
        "rewards.svg",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    // The echoed config reproduces the run.
    let c = dir.path().join("c");
    let o = qrlnas(&[
        "run",
        "-c",
        a.join("config_echo.json").to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(a.join("checkpoint.json")).unwrap(),
        std::fs::read(c.join("checkpoint.json")).unwrap()
    );
}

#[test]
fn seed_env_var_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = Command::new(QRLNAS)
        .args(["run", "--episodes", "2", "--out", out.to_str().unwrap()])
        .env("QRLNAS_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        Checkpoint::load(&out.join("checkpoint.json")).unwrap().seed,
        42
    );
}

#[test]
fn checkpoint_round_trip_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = qrlnas(&[
        "run",
        "--algo",
        "qrl-reinforce",
        "--env",
        "cartpole",
        "--episodes",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let path = out.join("checkpoint.json");
    let original = std::fs::read_to_string(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded.to_json(), original);
    let again = dir.path().join("again.json");
    loaded.save(&again).unwrap();
    assert_eq!(Checkpoint::load(&again).unwrap(), loaded);
    let v: serde_json::Value = serde_json::from_str(&original).unwrap();
    for key in [
        "version",
        "n_qubits",
        "genome",
        "params",
        "head",
        "encoder",
        "config_echo",
        "seed",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v["genome"][0].get("param_offset").is_some());

    let o = qrlnas(&["inspect-checkpoint", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("PolicyProbs"));
    std::fs::write(dir.path().join("bad.json"), "{\"version\":1}").unwrap();
    assert_eq!(
        qrlnas(&[
            "inspect-checkpoint",
            dir.path().join("bad.json").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn nas_run_writes_search_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nas.toml");
    std::fs::write(
        &cfg,
        "algo = \"qrl-nas\"\nepisodes = 3\n[search]\npopulation = 3\ngenerations = 2\ntrain_budget = 150\neval_episodes = 2\n",
    )
    .unwrap();
    let run = |out: &PathBuf, workers: &str| {
        let o = qrlnas(&[
            "run",
            "-c",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&a, "1");
    run(&b, "2");
    let log = std::fs::read_to_string(a.join("search_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 3 * 2);
    assert!(log.starts_with("generation,candidate,fitness,genome_json\n"));
    assert_eq!(
        log,
        std::fs::read_to_string(b.join("search_log.csv")).unwrap()
    );
    let arch: qrlnas_core::qnet::Architecture =
        serde_json::from_str(&std::fs::read_to_string(a.join("best_architecture.json")).unwrap())
            .unwrap();
    assert_eq!(arch.len(), 12);

    // The searched genome can seed a fixed-architecture run.
    let c = dir.path().join("c");
    let o = qrlnas(&[
        "run",
        "--architecture",
        a.join("best_architecture.json").to_str().unwrap(),
        "--episodes",
        "2",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = qrlnas(&["run", "--lr", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(
        qrlnas(&["run", "-c", "/no/such/config.toml"]).status.code(),
        Some(2)
    );
    let o = qrlnas(&[
        "run",
        "--env",
        "bridge:/no/such/bridge",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plot_examples() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("single.csv");
    write_log(&one, &[3.0]);
    let svg = dir.path().join("one.svg");
    plot_rewards(std::slice::from_ref(&one), &svg, 50).unwrap();
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<circle") && !text.contains("<polyline"));

    let mut paths = Vec::new();
    for name in ["nas", "dqn", "reinforce"] {
        let p = dir.path().join(format!("{name}.csv"));
        write_log(&p, &[1.0, 2.0, 0.5, 4.0]);
        paths.push(p);
    }
    let svg = dir.path().join("three.svg");
    plot_rewards(&paths, &svg, 2).unwrap();
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 3);
    for name in ["nas", "dqn", "reinforce"] {
        assert!(text.contains(&format!(">{name}</text>")), "{name}");
    }

    let empty = dir.path().join("empty.csv");
    RewardLog::new().write_csv(&empty).unwrap();
    let o = qrlnas(&[
        "plot",
        empty.to_str().unwrap(),
        "-o",
        dir.path().join("e.svg").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("junk.csv"), "a,b\n1,2\n").unwrap();
    let o = qrlnas(&["plot", dir.path().join("junk.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn moving_average_is_trailing() {
    assert_eq!(
        moving_average(&[2.0, 4.0, 6.0, 8.0], 2),
        vec![2.0, 3.0, 5.0, 7.0]
    );
    assert_eq!(moving_average(&[1.0], 50), vec![1.0]);
}

#[test]
fn stub_bridge_meets_the_environment_contract() {
    let mut env = BridgeEnv::spawn(&[STUB.to_string()], 10_000).unwrap();
    assert_eq!(check_environment(&mut env, 0, 20), Vec::<String>::new());
    env.close().unwrap();
}

#[test]
fn golden_transcript_is_reproduced() {
    let (transcript, checks) = scripted_session(Path::new(STUB), 10_000).unwrap();
    assert_eq!(transcript.render(), GOLDEN_TRANSCRIPT);
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    let all = bridge_check(Path::new(STUB), GOLDEN_TRANSCRIPT);
    assert!(all.iter().all(|c| c.passed), "{all:?}");
    assert!(!bridge_check(Path::new(STUB), "tampered\n")[0].passed);
    assert!(qrlnas(&["bridge-check"]).status.success());
}
