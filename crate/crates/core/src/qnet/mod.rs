//! The quantum network: RX angle encoder, genome-defined circuit, `⟨Z⟩`
//! readout, and gradients.

pub mod architecture;
pub mod encoder;
pub mod grad;
pub mod head;
pub mod model;

pub use architecture::{init_params, Architecture, ParamStore};
pub use encoder::{encode, EncoderLayout, Squash};
pub use grad::{backward, forward, grad_parameter_shift, parameter_shift_jacobian};
pub use head::{log_softmax, softmax, HeadMode, OutputHead};
pub use model::{Evaluation, QModel};

use crate::error::Result;

/// `Q[a] = weights[a]·⟨Z_{action_wires[a]}⟩ + biases[a]`.
pub fn q_values(
    arch: &Architecture,
    params: &[f64],
    head: &OutputHead,
    layout: &EncoderLayout,
    features: &[f64],
) -> Result<Vec<f64>> {
    head.expect_mode(HeadMode::QValues)?;
    head.validate(arch.n_qubits())?;
    Ok(head.logits(&forward(arch, params, layout, features)?))
}

/// Softmax over the head's affine readout.
pub fn policy_probs(
    arch: &Architecture,
    params: &[f64],
    head: &OutputHead,
    layout: &EncoderLayout,
    features: &[f64],
) -> Result<Vec<f64>> {
    head.expect_mode(HeadMode::PolicyProbs)?;
    head.validate(arch.n_qubits())?;
    Ok(softmax(
        &head.logits(&forward(arch, params, layout, features)?),
    ))
}
