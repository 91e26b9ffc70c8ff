use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrlnas_cli::bridge_check::{bridge_check, GOLDEN_TRANSCRIPT};
use qrlnas_cli::config::SEED_ENV_VAR;
use qrlnas_cli::plot::{plot_rewards, DEFAULT_WINDOW};
use qrlnas_cli::{exit_code, run, Checkpoint, Overrides, RunConfig};
use qrlnas_core::rl::evaluate;
use qrlnas_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qrlnas",
    version,
    about = "Quantum-circuit reinforcement learning with architecture search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one arm (qrl-nas, qrl-dqn or qrl-reinforce) and write its artifacts.
    Run(RunArgs),
    /// Draw reward CSVs as an SVG chart.
    Plot {
        /// One or more rewards.csv files; several are overlaid.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(short, long, default_value = "rewards.svg")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Summarize a checkpoint, optionally replaying it greedily.
    InspectCheckpoint {
        path: PathBuf,
        /// Greedy evaluation episodes on the checkpoint's environment.
        #[arg(long)]
        eval: Option<usize>,
    },
    /// Exercise the bridge protocol against the bundled stub.
    BridgeCheck {
        /// Stub executable; defaults to qrlnas-bridge-stub beside this binary.
        #[arg(long)]
        stub: Option<PathBuf>,
        /// Print the recorded transcript instead of checking it.
        #[arg(long)]
        print_transcript: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or a config_echo.json from an earlier run.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    /// gridworld, cartpole or bridge:<command>.
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    n_qubits: Option<usize>,
    /// Architecture JSON to use instead of the fixed baseline circuit.
    #[arg(long)]
    architecture: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    buffer_capacity: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Parallel fitness evaluations during search. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run_command(args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let seed_env = std::env::var(SEED_ENV_VAR).ok();
    config.apply(
        seed_env.as_deref(),
        &Overrides {
            algo: args.algo,
            env: args.env,
            n_qubits: args.n_qubits,
            architecture_file: args.architecture,
            lr: args.lr,
            gamma: args.gamma,
            batch_size: args.batch_size,
            buffer_capacity: args.buffer_capacity,
            episodes: args.episodes,
            seed: args.seed,
            output_dir: args.out,
        },
    )?;
    if args.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let summary = run(config, args.workers)?;
    println!("{summary}");
    Ok(())
}

fn inspect(path: &Path, eval: Option<usize>) -> Result<()> {
    let checkpoint = Checkpoint::load(path)?;
    let model = checkpoint.to_model()?;
    let cfg = &checkpoint.config_echo;
    println!("version      {}", checkpoint.version);
    println!("algo/env     {} / {}", cfg.algo, cfg.env);
    println!("seed         {}", checkpoint.seed);
    println!("qubits       {}", checkpoint.n_qubits);
    println!(
        "gates        {} ({} parameters)",
        model.arch.len(),
        model.arch.total_params()
    );
    println!("circuit      {}", model.arch.describe());
    println!(
        "head         {:?}, {} actions on wires {:?}",
        model.head.mode,
        model.n_actions(),
        model.head.action_wires
    );
    println!("head weights {:?}", model.head.weights);
    println!("head biases  {:?}", model.head.biases);
    println!(
        "encoder      {} features in {} sublayers",
        model.layout.n_features(),
        model.layout.sublayers().len()
    );
    if let Some(episodes) = eval {
        let mut env = qrlnas_cli::run::make_env(cfg)?;
        let result = evaluate(&model, env.as_mut(), episodes, true, checkpoint.seed)?;
        println!(
            "greedy eval  mean {:.6} over {episodes} episodes",
            result.mean
        );
    }
    Ok(())
}

fn check_bridge(stub: Option<PathBuf>, print_transcript: bool) -> Result<bool> {
    let stub = match stub {
        Some(s) => s,
        None => {
            let exe = std::env::current_exe()?;
            exe.with_file_name(format!(
                "qrlnas-bridge-stub{}",
                std::env::consts::EXE_SUFFIX
            ))
        }
    };
    if !stub.exists() {
        return Err(Error::Config(format!(
            "bridge stub not found at {}",
            stub.display()
        )));
    }
    if print_transcript {
        let (transcript, _) = qrlnas_cli::bridge_check::scripted_session(&stub, 10_000)?;
        print!("{}", transcript.render());
        return Ok(true);
    }
    let checks = bridge_check(&stub, GOLDEN_TRANSCRIPT);
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args).map(|_| true),
        Command::Plot { csv, out, window } => plot_rewards(&csv, &out, window).map(|_| true),
        Command::InspectCheckpoint { path, eval } => inspect(&path, eval).map(|_| true),
        Command::BridgeCheck {
            stub,
            print_transcript,
        } => check_bridge(stub, print_transcript),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
