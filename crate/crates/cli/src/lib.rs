//! Command-line orchestration: configuration, runs, checkpoints, plots and
//! the bridge self-test.

pub mod bridge_check;
pub mod checkpoint;
pub mod config;
pub mod plot;
pub mod run;

pub use checkpoint::Checkpoint;
pub use config::{Algo, EnvSpec, Overrides, RunConfig};
pub use run::{run, RunSummary};

/// Process exit status for an error: 2 for bad configuration, 1 otherwise.
pub fn exit_code(err: &qrlnas_core::Error) -> i32 {
    match err {
        qrlnas_core::Error::Config(_) => 2,
        _ => 1,
    }
}
