//! Experiment orchestration behind the command-line tool.

pub mod baseline;

pub use baseline::fixed_baseline_architecture;

use rand::Rng;

use crate::error::Result;
use crate::qnet::{init_params, Architecture, EncoderLayout, HeadMode, OutputHead, QModel, Squash};

/// Builds a freshly initialized model for an environment's dimensions.
pub fn build_model<R: Rng + ?Sized>(
    arch: Architecture,
    obs_dim: usize,
    n_actions: usize,
    mode: HeadMode,
    squash: Squash,
    train_head: bool,
    rng: &mut R,
) -> Result<QModel> {
    let params = init_params(&arch, rng);
    let n_qubits = arch.n_qubits();
    QModel::new(
        arch,
        params,
        OutputHead::for_actions(mode, n_actions, n_qubits),
        EncoderLayout::chunked(obs_dim, n_qubits, squash),
        train_head,
    )
}
