use serde::{Deserialize, Serialize};

use super::architecture::{Architecture, ParamStore};
use super::encoder::EncoderLayout;
use super::grad::{adjoint_from_state, run_circuit};
use super::head::{softmax, HeadMode, OutputHead};
use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// A complete quantum network: encoder, circuit, angles and readout head.
///
/// The trainable vector is the circuit angles followed, when `train_head` is
/// set, by the head weights and then the head biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QModel {
    pub arch: Architecture,
    pub params: ParamStore,
    pub head: OutputHead,
    pub layout: EncoderLayout,
    pub train_head: bool,
}

/// A forward pass kept around for backpropagation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    state: StateVector,
    pub expectations: Vec<f64>,
    pub logits: Vec<f64>,
}

impl QModel {
    pub fn new(
        arch: Architecture,
        params: ParamStore,
        head: OutputHead,
        layout: EncoderLayout,
        train_head: bool,
    ) -> Result<Self> {
        params.check_for(&arch)?;
        head.validate(arch.n_qubits())?;
        if layout.max_wire().is_some_and(|w| w >= arch.n_qubits()) {
            return Err(Error::contract(
                "encoder layout uses wires beyond the circuit",
            ));
        }
        Ok(Self {
            arch,
            params,
            head,
            layout,
            train_head,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.head.n_actions()
    }

    pub fn evaluate(&self, features: &[f64]) -> Result<Evaluation> {
        let state = run_circuit(&self.arch, &self.params, &self.layout, features)?;
        let expectations = state.expectations_z();
        let logits = self.head.logits(&expectations);
        Ok(Evaluation {
            state,
            expectations,
            logits,
        })
    }

    pub fn q_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.head.expect_mode(HeadMode::QValues)?;
        Ok(self.evaluate(features)?.logits)
    }

    pub fn policy_probs(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.head.expect_mode(HeadMode::PolicyProbs)?;
        Ok(softmax(&self.evaluate(features)?.logits))
    }

    pub fn n_trainable(&self) -> usize {
        let head = if self.train_head {
            2 * self.head.n_actions()
        } else {
            0
        };
        self.arch.total_params() + head
    }

    pub fn trainable(&self) -> Vec<f64> {
        let mut v = self.params.to_vec();
        if self.train_head {
            v.extend_from_slice(&self.head.weights);
            v.extend_from_slice(&self.head.biases);
        }
        v
    }

    pub fn set_trainable(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.n_trainable(), "trainable vector length");
        let p = self.arch.total_params();
        self.params.copy_from_slice(&values[..p]);
        if self.train_head {
            let a = self.head.n_actions();
            self.head.weights.copy_from_slice(&values[p..p + a]);
            self.head.biases.copy_from_slice(&values[p + a..]);
        }
    }

    /// Adds `∂L/∂trainable` to `grad` given `∂L/∂logits` for one evaluation.
    pub fn accumulate(&self, eval: &Evaluation, d_logits: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.n_trainable());
        let p = self.arch.total_params();
        let a = self.head.n_actions();
        let mut upstream = vec![0.0; self.arch.n_qubits()];
        let mut d_w = vec![0.0; a];
        let mut d_b = vec![0.0; a];
        self.head.backprop(
            &eval.expectations,
            d_logits,
            &mut upstream,
            &mut d_w,
            &mut d_b,
        );
        let circuit_grad = adjoint_from_state(&self.arch, &self.params, &eval.state, &upstream);
        for (g, c) in grad[..p].iter_mut().zip(circuit_grad) {
            *g += c;
        }
        if self.train_head {
            for (g, d) in grad[p..p + a].iter_mut().zip(d_w) {
                *g += d;
            }
            for (g, d) in grad[p + a..].iter_mut().zip(d_b) {
                *g += d;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnet::encoder::Squash;
    use crate::qsim::GateKind;

    fn model(train_head: bool) -> QModel {
        let arch = Architecture::new(
            2,
            vec![
                (GateKind::RY, vec![0]),
                (GateKind::CX, vec![0, 1]),
                (GateKind::RX, vec![1]),
            ],
        )
        .unwrap();
        let head = OutputHead {
            mode: HeadMode::QValues,
            weights: vec![2.0, -1.5],
            biases: vec![0.25, 0.5],
            action_wires: vec![0, 1],
        };
        QModel::new(
            arch,
            ParamStore::new(vec![0.4, -0.9]),
            head,
            EncoderLayout::chunked(2, 2, Squash::Arctan),
            train_head,
        )
        .unwrap()
    }

    #[test]
    fn trainable_round_trip() {
        let mut m = model(true);
        assert_eq!(m.n_trainable(), 6);
        let v = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        m.set_trainable(&v);
        assert_eq!(m.trainable(), v);
        assert_eq!(m.head.biases, vec![5.0, 6.0]);
        assert_eq!(model(false).n_trainable(), 2);
    }

    #[test]
    fn accumulate_matches_finite_differences() {
        let m = model(true);
        let x = [0.3, -0.7];
        // L = Σ_a c_a · logit_a
        let coeffs = [0.8, -1.1];
        let loss = |m: &QModel| -> f64 {
            m.q_values(&x)
                .unwrap()
                .iter()
                .zip(coeffs)
                .map(|(q, c)| q * c)
                .sum()
        };
        let mut grad = vec![0.0; m.n_trainable()];
        m.accumulate(&m.evaluate(&x).unwrap(), &coeffs, &mut grad);
        let base = m.trainable();
        let h = 1e-6;
        for k in 0..base.len() {
            let mut plus = m.clone();
            let mut v = base.clone();
            v[k] += h;
            plus.set_trainable(&v);
            let mut minus = m.clone();
            v[k] -= 2.0 * h;
            minus.set_trainable(&v);
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-7, "k={k} fd={fd} got={}", grad[k]);
        }
    }

    #[test]
    fn mode_mismatch() {
        let m = model(false);
        assert!(matches!(
            m.policy_probs(&[0.0, 0.0]),
            Err(Error::Contract(_))
        ));
    }
}
